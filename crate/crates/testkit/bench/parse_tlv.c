int parse_tlv(const unsigned char *buf, size_t len, struct tlv_cb *cb)
{
    size_t off = 0;
    unsigned type;
    unsigned item_len;
    unsigned depth = 0;
    int rc;

    if (buf == NULL || cb == NULL || cb->on_item == NULL)
        return TLV_EINVAL;
    if (len > TLV_MAX_MESSAGE)
        return TLV_TOO_LARGE;
    cb->items_done = 0;
    cb->items_seen = 0;
    while (off + 2 <= len) {
        type = buf[off];
        item_len = buf[off + 1];
        if (type == TLV_PAD) {
            off++;
            continue;
        }
        if (off + 2 + item_len > len)
            return TLV_TRUNCATED;
        if (type == TLV_NEST_BEGIN) {
            if (++depth > TLV_MAX_DEPTH)
                return TLV_TOO_DEEP;
        } else if (type == TLV_NEST_END) {
            if (depth == 0)
                return TLV_UNBALANCED;
            depth--;
        }
        rc = cb->on_item(cb->ctx, type, buf + off + 2, item_len);
        if (rc != 0)
            return rc;
        cb->items_seen++;
        off += item_len;
    }
    if (depth != 0)
        return TLV_UNBALANCED;
    if (off != len && !(cb->flags & TLV_ALLOW_TRAILING))
        return TLV_TRAILING;
    cb->items_done = 1;
    return TLV_OK;
}
