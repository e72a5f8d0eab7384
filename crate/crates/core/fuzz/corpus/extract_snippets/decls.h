#define MAX_HDR 8192
static const int limits[] = { 16, 32, 65536 };
struct frame {
    int len;
};
typedef int length_t;
