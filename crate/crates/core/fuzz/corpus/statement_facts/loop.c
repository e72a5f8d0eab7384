while (c)
    sum += buf[k++];
