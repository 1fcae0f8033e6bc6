/*
 * Prime+Probe ground truth.
 *
 * Monitors one L1D cache set: the attacker primes the set with a
 * pointer-chased eviction list, the victim touches a congruent line,
 * and the probe traversal is timed. Two scenarios are sequenced
 * back-to-back (prime->probe and prime->victim->probe); their median
 * latency difference is the contention signal.
 *
 * Same marker grammar as the Spectre ground truth: open marker
 * "M<n>: <name>", close marker a line of asterisks.
 */
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <unistd.h>

#if defined(__x86_64__)
#include <x86intrin.h>
#elif defined(__aarch64__)
/* inline asm helpers below */
#else
#error "unsupported ISA: build on x86-64 or AArch64"
#endif

#define TRIALS 501
#define REPETITIONS 5
#define TARGET_SET 13

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

static inline void memory_fence(void)
{
#if defined(__x86_64__)
    _mm_mfence();
#else
    __asm__ __volatile__("dsb sy\n\tisb" : : : "memory");
#endif
}

/* L1D geometry, from sysconf with a sysfs fallback. */
static long cache_param(int name, const char *sysfs_leaf, long fallback)
{
    long value = sysconf(name);
    if (value > 0) {
        return value;
    }
    char path[128];
    snprintf(path, sizeof(path),
             "/sys/devices/system/cpu/cpu0/cache/index0/%s", sysfs_leaf);
    FILE *fh = fopen(path, "r");
    if (fh != NULL) {
        if (fscanf(fh, "%ld", &value) == 1 && value > 0) {
            fclose(fh);
            return value;
        }
        fclose(fh);
    }
    return fallback;
}

static int cmp_u64(const void *a, const void *b)
{
    uint64_t lhs = *(const uint64_t *)a, rhs = *(const uint64_t *)b;
    return (lhs > rhs) - (lhs < rhs);
}

/* Median over the samples that survive a spike filter: anything more
   than 50% above the scenario minimum is preemption or interrupt noise
   (timing spikes only ever add latency) and would smear the median on
   busy or virtualized hosts. */
static uint64_t median_u64(uint64_t *samples, int count)
{
    uint64_t floor_latency, limit;
    int kept = count;

    qsort(samples, count, sizeof(uint64_t), cmp_u64);
    floor_latency = samples[0];
    limit = floor_latency + floor_latency / 2;
    while (kept > 1 && samples[kept - 1] > limit) {
        kept--;
    }
    return samples[kept / 2];
}

/* M12: Victim Access Pattern (placeholder) */
static uint8_t *victim_buffer;

static void victim_access(void)
{
    volatile uint8_t *line = victim_buffer;
    (void)*line;
}
/*************************************************/

/* M16: Prime Phase Traversal (placeholder) */
static void *prime(void *head)
{
    void *p = head;
    while (p != NULL) {
        p = *(void **)p;
    }
    return p;
}
/*************************************************/

/* M17: Probe Phase Timing (placeholder) */
static uint64_t probe(void *head)
{
    uint64_t start, elapsed;
    void *p = head;
    memory_fence();
    start = timer_read();
    while (p != NULL) {
        p = *(void **)p;
    }
    memory_fence();
    elapsed = timer_read() - start;
    return elapsed;
}
/*************************************************/

int main(void)
{
    long line_size = cache_param(_SC_LEVEL1_DCACHE_LINESIZE, "coherency_line_size", 64);
    long assoc = cache_param(_SC_LEVEL1_DCACHE_ASSOC, "ways_of_associativity", 8);
    long cache_size = cache_param(_SC_LEVEL1_DCACHE_SIZE, "size", 32768);
    long sets = cache_size / (line_size * assoc);
    long way_stride = sets * line_size;
    long target_set;
    static uint64_t baseline[TRIALS], contended[TRIALS];
    uint8_t *arena;
    void *head;
    int i, t;

    if (sets <= 0 || assoc <= 0) {
        fprintf(stderr, "cache geometry unavailable\n");
        return 1;
    }
    target_set = TARGET_SET % sets;

    /* M13: Eviction Set Construction: Attacker (placeholder) */
    /* One address per way, each congruent to the target set. */
    if (posix_memalign((void **)&arena, (size_t)(sets * line_size),
                       (size_t)(assoc * way_stride)) != 0) {
        return 1;
    }
    memset(arena, 0, (size_t)(assoc * way_stride));
    uint8_t **slots = calloc((size_t)assoc, sizeof(uint8_t *));
    for (i = 0; i < assoc; i++) {
        slots[i] = arena + (size_t)i * way_stride + target_set * line_size;
    }
    /*************************************************/

    /* M14: Eviction Set Construction: Victim (placeholder) */
    /* A separate buffer whose accessed line lands in the same set. */
    if (posix_memalign((void **)&victim_buffer, (size_t)(sets * line_size),
                       (size_t)way_stride) != 0) {
        return 1;
    }
    memset(victim_buffer, 1, (size_t)way_stride);
    victim_buffer += target_set * line_size;
    /*************************************************/

    /* M15: Pointer-Chasing Linked List Setup (placeholder) */
    /* Thread the slots in a shuffled order so every load depends on
       the previous one and the streaming prefetcher finds no stride. */
    {
        int *order = calloc((size_t)assoc, sizeof(int));
        unsigned int rng = 0x5eedu;
        int swap;
        for (i = 0; i < assoc; i++) {
            order[i] = i;
        }
        for (i = (int)assoc - 1; i > 0; i--) {
            rng = rng * 1103515245u + 12345u;
            swap = (int)(rng % (unsigned int)(i + 1));
            int tmp = order[i];
            order[i] = order[swap];
            order[swap] = tmp;
        }
        for (i = 0; i < assoc; i++) {
            *(void **)slots[order[i]] =
                (i == assoc - 1) ? NULL : (void *)slots[order[i + 1]];
        }
        head = slots[order[0]];
        free(order);
    }
    /*************************************************/

    printf("eviction_set_size=%ld\n", assoc);

    /* M19: Scenario Sequencing */
    /* Strict order per trial: prime -> probe gives the baseline, then
       prime -> victim -> probe gives the contended reading. The whole
       batch repeats a few times and the quietest window (the one with
       the lowest baseline median) is reported, since both scenarios of
       one window share whatever system noise hit it. */
    {
        uint64_t best_base = (uint64_t)-1, best_cont = 0;
        int rep;
        for (rep = 0; rep < REPETITIONS; rep++) {
            uint64_t base_med, cont_med;
            for (t = 0; t < TRIALS; t++) {
                prime(head);
                baseline[t] = probe(head);
                prime(head);
                victim_access();
                contended[t] = probe(head);
            }
            base_med = median_u64(baseline, TRIALS);
            cont_med = median_u64(contended, TRIALS);
            if (base_med < best_base) {
                best_base = base_med;
                best_cont = cont_med;
            }
        }
        baseline[0] = best_base;
        contended[0] = best_cont;
    }
    /*************************************************/

    /* M18: Hit/Miss Classification Threshold */
    {
        uint64_t base_med = baseline[0];
        uint64_t cont_med = contended[0];
        long delta = (long)cont_med - (long)base_med;
        printf("baseline_cycles=%llu\n", (unsigned long long)base_med);
        printf("contended_cycles=%llu\n", (unsigned long long)cont_med);
        printf("delta_cycles=%ld\n", delta);
        printf("%s\n", delta >= 5 ? "contention=observed" : "contention=absent");
    }
    /*************************************************/

    free(slots);
    return 0;
}
