/*
 * Cache hit/miss latency calibration microbenchmark.
 *
 * This file is a template: each at-sign-delimited token is substituted
 * before compilation with the ISA-appropriate timer, flush, and fence
 * fragments plus sample counts. The instantiated program measures the
 * access latency of one cache line in the cached and the flushed state
 * and prints the two medians on dedicated lines:
 *
 *   timer=@TIMER_NAME@
 *   flush=@FLUSH_NAME@
 *   hit_median=<cycles>
 *   miss_median=<cycles>
 */
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
@ISA_INCLUDES@

#define SAMPLES @SAMPLES@
#define WARMUP @WARMUP@

static uint8_t probe_buffer[4096];

static inline uint64_t timer_read(void)
{
@TIMER_READ@
}

static inline void flush_line(const void *address)
{
@FLUSH_LINE@
}

static inline void memory_fence(void)
{
@MEMORY_FENCE@
}

static int cmp_u64(const void *a, const void *b)
{
    uint64_t lhs = *(const uint64_t *)a, rhs = *(const uint64_t *)b;
    return (lhs > rhs) - (lhs < rhs);
}

static uint64_t measure_once(int flushed)
{
    volatile uint8_t *address = &probe_buffer[2048];
    uint64_t start, elapsed;

    if (flushed) {
        flush_line((const void *)address);
    } else {
        (void)*address;
    }
    memory_fence();
    start = timer_read();
    (void)*address;
    elapsed = timer_read() - start;
    return elapsed;
}

int main(void)
{
    static uint64_t hits[SAMPLES], misses[SAMPLES];
    int i;

    for (i = 0; i < WARMUP; i++) {
        (void)measure_once(0);
        (void)measure_once(1);
    }
    for (i = 0; i < SAMPLES; i++) {
        hits[i] = measure_once(0);
    }
    for (i = 0; i < SAMPLES; i++) {
        misses[i] = measure_once(1);
    }
    qsort(hits, SAMPLES, sizeof(uint64_t), cmp_u64);
    qsort(misses, SAMPLES, sizeof(uint64_t), cmp_u64);
    printf("timer=@TIMER_NAME@\n");
    printf("flush=@FLUSH_NAME@\n");
    printf("hit_median=%llu\n", (unsigned long long)hits[SAMPLES / 2]);
    printf("miss_median=%llu\n", (unsigned long long)misses[SAMPLES / 2]);
    return 0;
}
