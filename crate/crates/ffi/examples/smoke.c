#include <math.h>
#include <stdio.h>

#include "cgl_ffi.h"

int main(void) {
    double lengths[1] = {1.0};
    size_t n[1] = {8};
    CglGrid *grid = NULL;
    if (cgl_grid_new(1, lengths, n, &grid) != CGL_STATUS_OK) {
        fprintf(stderr, "grid: %s\n", cgl_last_error_message());
        return 1;
    }

    double u1[8], u2[8];
    for (int i = 0; i < 8; i++) {
        u1[i] = sin(M_PI * (i + 1) / 9.0);
        u2[i] = 0.0;
    }
    CglField *field = NULL;
    cgl_field_new(u1, u2, 8, &field);

    double phi = 0.0;
    cgl_phi(grid, field, &phi);
    printf("phi = %.12f\n", phi);

    CglStatus s = cgl_phi(grid, NULL, &phi);
    printf("null field -> %d (%s)\n", (int)s, cgl_last_error_message());

    cgl_field_free(field);
    cgl_grid_free(grid);
    return s == CGL_STATUS_NULL_POINTER ? 0 : 1;
}
