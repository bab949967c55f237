/* Reference mt19937ar generator used to freeze the oracle values in
 * tests/data/mt19937_reference.json. Build and run:
 *
 *   cc -O2 -o mt_ref tests/reference/mt19937_ref.c
 *   ./mt_ref > tests/data/mt19937_reference.json
 *
 * Emits, for each seed 0..4, the first 1000 outputs of genrand_int32
 * after init_genrand(seed).
 */
#include <stdio.h>

#define N 624
#define M 397
#define MATRIX_A 0x9908b0dfUL
#define UPPER_MASK 0x80000000UL
#define LOWER_MASK 0x7fffffffUL

static unsigned long mt[N];
static int mti = N + 1;

static void init_genrand(unsigned long s)
{
    mt[0] = s & 0xffffffffUL;
    for (mti = 1; mti < N; mti++) {
        mt[mti] = (1812433253UL * (mt[mti - 1] ^ (mt[mti - 1] >> 30)) + mti);
        mt[mti] &= 0xffffffffUL;
    }
}

static unsigned long genrand_int32(void)
{
    unsigned long y;
    static unsigned long mag01[2] = {0x0UL, MATRIX_A};

    if (mti >= N) {
        int kk;
        if (mti == N + 1)
            init_genrand(5489UL);
        for (kk = 0; kk < N - M; kk++) {
            y = (mt[kk] & UPPER_MASK) | (mt[kk + 1] & LOWER_MASK);
            mt[kk] = mt[kk + M] ^ (y >> 1) ^ mag01[y & 0x1UL];
        }
        for (; kk < N - 1; kk++) {
            y = (mt[kk] & UPPER_MASK) | (mt[kk + 1] & LOWER_MASK);
            mt[kk] = mt[kk + (M - N)] ^ (y >> 1) ^ mag01[y & 0x1UL];
        }
        y = (mt[N - 1] & UPPER_MASK) | (mt[0] & LOWER_MASK);
        mt[N - 1] = mt[M - 1] ^ (y >> 1) ^ mag01[y & 0x1UL];
        mti = 0;
    }

    y = mt[mti++];

    /* Tempering */
    y ^= (y >> 11);
    y ^= (y << 7) & 0x9d2c5680UL;
    y ^= (y << 15) & 0xefc60000UL;
    y ^= (y >> 18);

    return y;
}

int main(void)
{
    int seed, i;
    printf("{\n");
    for (seed = 0; seed <= 4; seed++) {
        init_genrand((unsigned long)seed);
        printf("  \"%d\": [", seed);
        for (i = 0; i < 1000; i++) {
            printf("%lu%s", genrand_int32(), i < 999 ? ", " : "");
        }
        printf("]%s\n", seed < 4 ? "," : "");
    }
    printf("}\n");
    return 0;
}
