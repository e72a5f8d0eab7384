int ring_push(struct ring *rb, const struct msg *m, int flags)
{
    unsigned next;
    unsigned used;
    int woke = 0;

    if (m == NULL || m->len > RING_MSG_MAX)
        return RING_EINVAL;
    lock_ring(rb);
    if (rb->closed) {
        unlock_ring(rb);
        return RING_CLOSED;
    }
    next = rb->head + 1;
    if (next > rb->capacity)
        next = 0;
    while (next == rb->tail) {
        if (flags & RING_NONBLOCK) {
            rb->dropped++;
            unlock_ring(rb);
            return RING_FULL;
        }
        rb->writers_waiting++;
        cond_wait(&rb->not_full, &rb->lock);
        rb->writers_waiting--;
        if (rb->closed) {
            unlock_ring(rb);
            return RING_CLOSED;
        }
    }
    rb->slots[rb->head].len = m->len;
    rb->slots[rb->head].kind = m->kind;
    memcpy(rb->slots[rb->head].data, m->data, m->len);
    rb->head = next;
    rb->pushed++;
    used = rb->head >= rb->tail ? rb->head - rb->tail : rb->capacity - rb->tail + rb->head;
    if (used > rb->high_water)
        rb->high_water = used;
    if (rb->readers_waiting > 0) {
        cond_signal(&rb->not_empty);
        woke = 1;
    }
    unlock_ring(rb);
    return woke ? RING_OK_WOKE : RING_OK;
}
