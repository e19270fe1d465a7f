/* Up-and-out call on the Black-Scholes baseline, priced three ways. */
#include <stdio.h>
#include "fqbarrier.h"

static int check(FqbStatus s, const char *what) {
    if (s != FQB_STATUS_OK) {
        fprintf(stderr, "%s failed (%d): %s\n", what, (int)s, fqb_last_error_message());
        return 1;
    }
    return 0;
}

int main(void) {
    FqbModel model = {FQB_MODEL_KIND_BLACK_SCHOLES, 0.15, 0.07, 0.0, 0.0, 100.0};
    FqbContract contract = {FQB_BARRIER_UP_AND_OUT, FQB_PAYOFF_CALL, 100.0, 115.0, 1.0};

    double closed = 0.0;
    if (check(fqb_closed_form(&model, &contract, &closed), "closed form")) return 1;

    FqbChain *chain = NULL;
    if (check(fqb_chain_new(&model, 1.0, 10, 1000, 4, &chain), "chain")) return 1;
    FqbQuantPrice q;
    FqbStatus s = fqb_chain_price(chain, &contract, &q);
    fqb_chain_free(chain);
    if (check(s, "quantization")) return 1;

    FqbMcResult mc;
    if (check(fqb_rbb_price(&model, &contract, 20, 100000, 1, FQB_ESTIMATOR_CONDITIONAL, &mc), "monte carlo")) return 1;

    printf("closed %.6f\nquant %.6f\nrbb %.6f %.6f\n", closed, q.call, mc.price, mc.std_error);

    FqbModel cev = {FQB_MODEL_KIND_PSEUDO_CEV, 0.15, 0.0, 0.7, 0.5, 100.0};
    if (fqb_closed_form(&cev, &contract, &closed) != FQB_STATUS_UNSUPPORTED) return 1;
    printf("error %s\n", fqb_last_error_message());
    return 0;
}
