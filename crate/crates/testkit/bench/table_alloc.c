void *table_alloc(struct arena *a, size_t rows, size_t cols, size_t elem)
{
    struct table_hdr *hdr;
    size_t total;
    size_t padded;
    unsigned char *mem;

    if (rows == 0 || cols == 0 || elem == 0) {
        a->empty_requests++;
        return a->empty_sentinel;
    }
    if (elem > ARENA_MAX_ELEM) {
        arena_log(a, "element size %zu too large", elem);
        return NULL;
    }
    total = rows * cols * elem;
    padded = (total + sizeof(*hdr) + ARENA_ALIGN - 1) & ~(size_t)(ARENA_ALIGN - 1);
    if (padded > a->limit - a->used) {
        if (arena_grow(a, padded) != 0) {
            a->failures++;
            arena_log(a, "cannot grow arena by %zu bytes", padded);
            return NULL;
        }
    }
    mem = arena_get(a, padded);
    if (mem == NULL) {
        a->failures++;
        return NULL;
    }
    hdr = (struct table_hdr *)mem;
    hdr->rows = rows;
    hdr->cols = cols;
    hdr->elem = elem;
    hdr->magic = TABLE_MAGIC;
    memset(mem + sizeof(*hdr), 0, total);
    a->live_bytes += padded;
    a->tables++;
    if (a->live_bytes > a->peak_bytes)
        a->peak_bytes = a->live_bytes;
    return mem + sizeof(*hdr);
}
