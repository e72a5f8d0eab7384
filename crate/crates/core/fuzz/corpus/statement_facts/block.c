for (i = 0; i < n; i++) {
    if (p == NULL)
        return -1;
    buf[i] = get(f);
}
x = (int)y->len + f(a, b);
