void audit_record(struct audit *au, const char *user, const char *action, int status)
{
    char line[AUDIT_LINE_MAX];
    char stamp[32];
    struct tm tm;
    time_t now;
    int n;

    if (au == NULL || !au->enabled)
        return;
    if (status == AUDIT_SUCCESS && !(au->flags & AUDIT_LOG_SUCCESS))
        return;
    now = time(NULL);
    if (au->flags & AUDIT_UTC)
        gmtime_r(&now, &tm);
    else
        localtime_r(&now, &tm);
    strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%S", &tm);
    n = snprintf(line, sizeof(line), "%s user=%s action=%s status=%d",
                 stamp, user != NULL ? user : "-", action, status);
    if (n < 0)
        return;
    if ((size_t)n >= sizeof(line))
        au->truncated++;
    au->records++;
    if (au->flags & AUDIT_SYSLOG)
        syslog(LOG_NOTICE, line);
    if (au->mirror != NULL) {
        fputs(line, au->mirror);
        fputc('\n', au->mirror);
        if (au->flags & AUDIT_FLUSH)
            fflush(au->mirror);
    }
    if (status != AUDIT_SUCCESS && au->on_failure != NULL)
        au->on_failure(au->failure_ctx, user, action);
}
