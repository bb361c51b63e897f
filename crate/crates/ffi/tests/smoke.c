#include <math.h>
#include <stdio.h>
#include "pdc.h"

int main(void) {
    PdcSpectrum *s = NULL;
    if (pdc_spectrum_gaussian_mehler(25.0, 1.0, 0.7853981633974483, 1e-9, &s) != PDC_STATUS_OK) {
        fprintf(stderr, "%s\n", pdc_last_error());
        return 1;
    }
    double k = pdc_spectrum_schmidt_number(s);
    double c = 0.0;
    PdcPnd *p = NULL;
    if (pdc_solve_coupling(s, 1.0, &c) != PDC_STATUS_OK ||
        pdc_pnd_from_spectrum(s, c, 1e-10, &p) != PDC_STATUS_OK) {
        return 2;
    }
    double mean = pdc_pnd_mean(p);
    PdcPnd *bad = NULL;
    int status = pdc_pnd_apply_loss(p, 2.0, &bad);
    printf("%s %.9f %.9f %d\n", pdc_version(), k, mean, status);
    pdc_pnd_free(p);
    pdc_spectrum_free(s);
    return fabs(k - 2.6) < 1e-9 && fabs(mean - 1.0) < 1e-8 && status == PDC_STATUS_EFFICIENCY_OUT_OF_RANGE ? 0 : 3;
}
