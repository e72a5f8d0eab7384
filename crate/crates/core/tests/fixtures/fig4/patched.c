static int
load_colormap(tga_source_ptr source, FILE *infile, int cmaplen)
{
  int i, mapsize = 0, nread = 0;
  JSAMPARRAY colormap = source->colormap;
  j_compress_ptr cinfo = source->cinfo;
  unsigned int idlen, flags, cmaptype, subtype;

  idlen = source->header[0];
  cmaptype = source->header[1];
  subtype = source->header[2];
  flags = source->header[17];
  source->pixel_size = source->header[16] >> 3;
  if (cmaptype > 1 || source->pixel_size < 1 || source->pixel_size > 4)
    ERREXIT(cinfo, JERR_TGA_BADPARMS);
  if (subtype > 8) {
    source->is_rle = TRUE;
    subtype -= 8;
  } else {
    source->is_rle = FALSE;
  }
  while (idlen--)
    (void) read_byte(source);
  TRACEMS2(cinfo, 1, JTRC_TGA_MAPPED, source->width, source->height);
  if (cmaplen < 1)
    cmaplen = 1;
  source->cmap_len = cmaplen;
  mapsize = cmaplen * 3;
  for (i = 0; i < cmaplen; i++) {
    /* Presently only handles 24-bit BGR format */
    colormap[2][i] = (JSAMPLE) read_byte(infile);
    colormap[1][i] = (JSAMPLE) read_byte(infile);
    colormap[0][i] = (JSAMPLE) read_byte(infile);
    check_eof(infile);
    nread++;
  }
  source->map_size = mapsize;
  source->get_pixel_rows = get_8bit_row;
  cinfo->in_color_space = JCS_RGB;
  cinfo->input_components = 3;
  cinfo->data_precision = 8;
  if (flags & 0x20)
    source->pub.get_pixel_rows = preload_image;
  else
    source->pub.get_pixel_rows = get_8bit_row;
  return nread;
}
