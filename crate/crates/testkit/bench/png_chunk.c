static int read_chunk(struct png_reader *r, unsigned char *out, size_t cap)
{
    uint32_t len;
    uint32_t type;
    uint32_t stored_crc;
    uint32_t computed;

    if (r->done)
        return PNG_ERR_STATE;
    if (r->cursor + 8 > r->end) {
        r->error = "truncated chunk header";
        return PNG_ERR_TRUNCATED;
    }
    len = read_be32(r->cursor);
    type = read_be32(r->cursor + 4);
    r->cursor += 8;
    r->chunks_seen++;
    if (r->chunks_seen == 1 && type != CHUNK_IHDR) {
        r->error = "first chunk is not IHDR";
        return PNG_ERR_ORDER;
    }
    memcpy(out, r->cursor, len);
    r->cursor += len;
    computed = crc32_update(crc32_init(), (const unsigned char *)&type, 4);
    computed = crc32_update(computed, out, len);
    stored_crc = read_be32(r->cursor);
    r->cursor += 4;
    if (stored_crc != computed && !(r->flags & PNG_IGNORE_CRC)) {
        r->error = "chunk crc mismatch";
        return PNG_ERR_CRC;
    }
    switch (type) {
    case CHUNK_IHDR:
        r->width = read_be32(out);
        r->height = read_be32(out + 4);
        r->bit_depth = out[8];
        r->color_type = out[9];
        break;
    case CHUNK_PLTE:
        r->palette_entries = len / 3;
        break;
    case CHUNK_IEND:
        r->done = 1;
        break;
    default:
        if (!(type & CHUNK_ANCILLARY_BIT))
            r->unknown_critical++;
        break;
    }
    return (int)len;
}
