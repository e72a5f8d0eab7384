int archive_extract_entry(struct archive *ar, const struct entry *e, const char *dest)
{
    char path[PATH_MAX];
    struct stat st;
    mode_t mode;
    int fd;
    int rc;

    if (e->type == ENTRY_DIRECTORY)
        return archive_make_dir(ar, e, dest);
    if (e->type == ENTRY_SYMLINK && !(ar->flags & AR_ALLOW_SYMLINKS)) {
        ar->skipped++;
        return AR_OK;
    }
    if (snprintf(path, sizeof(path), "%s/%s", dest, e->name) >= (int)sizeof(path))
        return AR_ENAMETOOLONG;
    if (lstat(path, &st) == 0) {
        if (!(ar->flags & AR_OVERWRITE)) {
            ar->skipped++;
            return AR_EEXIST;
        }
        if (S_ISDIR(st.st_mode))
            return AR_EISDIR;
        unlink(path);
    }
    mode = e->mode & 0777;
    if (!(ar->flags & AR_KEEP_SETUID))
        mode &= ~(mode_t)(S_ISUID | S_ISGID);
    fd = open(path, O_WRONLY | O_CREAT | O_TRUNC, mode);
    if (fd < 0)
        return AR_EIO;
    rc = copy_stream(ar->in, fd, e->size);
    if (rc == 0 && (ar->flags & AR_SYNC))
        rc = fsync(fd);
    close(fd);
    if (rc != 0) {
        unlink(path);
        return AR_EIO;
    }
    if (ar->flags & AR_PRESERVE_TIMES)
        set_mtime(path, e->mtime);
    ar->extracted++;
    ar->bytes += e->size;
    return AR_OK;
}
