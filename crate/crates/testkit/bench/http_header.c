int http_parse_header(struct http_req *req, const char *line)
{
    const char *colon;
    const char *value;
    size_t name_len;
    size_t value_len;
    int i;

    if (req->header_count >= HTTP_MAX_HEADERS)
        return HTTP_ERR_TOO_MANY;
    if (line[0] == ' ' || line[0] == '\t') {
        /* obsolete line folding */
        return http_append_folded(req, line);
    }
    colon = strchr(line, ':');
    name_len = (size_t)(colon - line);
    if (name_len == 0 || name_len >= sizeof(req->headers[0].name))
        return HTTP_ERR_TOO_LONG;
    for (i = 0; i < (int)name_len; i++) {
        if (!is_token_char((unsigned char)line[i]))
            return HTTP_ERR_BAD_NAME;
    }
    value = colon + 1;
    while (*value == ' ' || *value == '\t')
        value++;
    value_len = strlen(value);
    while (value_len > 0 && (value[value_len - 1] == ' ' || value[value_len - 1] == '\t'))
        value_len--;
    memcpy(req->headers[req->header_count].name, line, name_len);
    req->headers[req->header_count].name[name_len] = '\0';
    req->headers[req->header_count].value = strndup(value, value_len);
    if (req->headers[req->header_count].value == NULL)
        return HTTP_ERR_NOMEM;
    if (strcasecmp(req->headers[req->header_count].name, "Content-Length") == 0)
        req->content_length = strtoul(req->headers[req->header_count].value, NULL, 10);
    else if (strcasecmp(req->headers[req->header_count].name, "Connection") == 0)
        req->keep_alive = strcasecmp(req->headers[req->header_count].value, "close") != 0;
    req->header_count++;
    return HTTP_OK;
}
