#include <math.h>
#include <stdio.h>
#include <string.h>

#include "chebotarev.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            fprintf(stderr, "check failed: %s\n", #cond);        \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(int argc, char **argv) {
    double re[] = {-1.0, 0.0, 2.0};
    ChebPoly *p = NULL;
    CHECK(cheb_poly_new(re, NULL, 3, &p) == CHEB_STATUS_OK);
    double cap = 0.0;
    CHECK(cheb_poly_capacity(p, &cap) == CHEB_STATUS_OK);
    CHECK(fabs(cap - 0.5) < 1e-12);
    bool connected = false;
    CHECK(cheb_poly_is_connected(p, &connected) == CHEB_STATUS_OK && connected);
    cheb_poly_free(p);

    CHECK(cheb_poly_degree(NULL, NULL) == CHEB_STATUS_NULL_POINTER);
    CHECK(cheb_last_error_message() != NULL);

    if (argc < 2) {
        return 1;
    }
    FILE *f = fopen(argv[1], "rb");
    CHECK(f != NULL);
    static char spec[1 << 16];
    size_t n = fread(spec, 1, sizeof spec - 1, f);
    fclose(f);
    spec[n] = '\0';

    ChebSolution *s = NULL;
    CHECK(cheb_solve_json(spec, &s) == CHEB_STATUS_OK);
    size_t count = 0;
    CHECK(cheb_solution_point_count(s, CHEB_ROLE_C, &count) == CHEB_STATUS_OK && count == 4);
    double x, y;
    CHECK(cheb_solution_point(s, CHEB_ROLE_C, 0, &x, &y) == CHEB_STATUS_OK);
    printf("beta %.10f\n", y);
    char *json = NULL;
    CHECK(cheb_solution_to_json(s, &json) == CHEB_STATUS_OK && strstr(json, "coefficients") != NULL);
    cheb_string_free(json);
    cheb_solution_free(s);
    return 0;
}
