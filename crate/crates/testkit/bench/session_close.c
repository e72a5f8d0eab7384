void session_close(struct server *srv, struct session *s, int reason)
{
    struct session **pp;
    struct pending *p;
    struct pending *next;

    if (s->state == SESSION_CLOSED)
        return;
    s->state = SESSION_CLOSED;
    for (pp = &srv->sessions; *pp != NULL; pp = &(*pp)->next) {
        if (*pp == s) {
            *pp = s->next;
            break;
        }
    }
    for (p = s->pending; p != NULL; p = next) {
        next = p->next;
        if (p->callback != NULL)
            p->callback(p->arg, PENDING_ABORTED);
        free(p->payload);
        free(p);
    }
    if (s->timer_armed) {
        timer_cancel(&srv->timers, &s->timer);
        s->timer_armed = 0;
    }
    if (reason == CLOSE_PEER_RESET)
        srv->stats.resets++;
    else if (reason == CLOSE_TIMEOUT)
        srv->stats.timeouts++;
    tls_shutdown(s->tls);
    tls_free(s->tls);
    close(s->fd);
    free(s->buffer);
    free(s);
    srv->active--;
    log_event(srv->log, EV_CLOSE, s->id);
    if (srv->active == 0 && srv->draining)
        server_finish_drain(srv);
}
