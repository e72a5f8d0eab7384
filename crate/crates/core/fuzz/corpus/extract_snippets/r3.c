#include "config.h"
#include <epan/packet.h>
#include <epan/expert.h>

static int proto_r3 = -1;
static gint ett_r3upstreamfield = -1;

static void
dissect_r3_upstreamcommand_getversion (tvbuff_t *tvb, guint32 start_offset, guint32 length, packet_info *pinfo, proto_tree *tree)
{
  proto_item *pi;

  pi = proto_tree_add_item (tree, hf_r3_version, tvb, start_offset, length, ENC_ASCII|ENC_NA);
  proto_item_append_text (pi, " (firmware)");
  col_append_str (pinfo->cinfo, COL_INFO, " getversion");
}

static void
dissect_r3_upstreamcommand_queryconfig (tvbuff_t *tvb, guint32 start_offset, guint32 length, packet_info *pinfo, proto_tree *tree)
{
  proto_item *upstreamfield_item = NULL;
  proto_tree *upstreamfield_tree = NULL;
  guint32 offset = 0;

  upstreamfield_item = proto_tree_add_text (tree, tvb, start_offset, length, "Upstream Field (Query Config)");
  upstreamfield_tree = proto_item_add_subtree (upstreamfield_item, ett_r3upstreamfield);

  while (offset < length)
  {
    guint32 item_length = tvb_get_guint8 (tvb, start_offset + offset);
    guint32 item_type = tvb_get_guint8 (tvb, start_offset + offset + 1);
    proto_item *pi;

    pi = proto_tree_add_item (upstreamfield_tree, hf_r3_configitem, tvb, start_offset + offset + 1, 1, ENC_LITTLE_ENDIAN);
    proto_item_append_text (pi, " (%u)", item_type);
    proto_item_set_len (pi, item_length);
    offset += item_length;
  }
  col_append_str (pinfo->cinfo, COL_INFO, " queryconfig");
}

static void
dissect_r3_upstreamcommand_dumpevent (tvbuff_t *tvb, guint32 start_offset, guint32 length, packet_info *pinfo, proto_tree *tree)
{
  guint32 event = tvb_get_letohl (tvb, start_offset);

  proto_tree_add_uint (tree, hf_r3_eventlog_event, tvb, start_offset, 4, event);
  if (length > 4)
    proto_tree_add_item (tree, hf_r3_eventlog_data, tvb, start_offset + 4, length - 4, ENC_NA);
  col_append_fstr (pinfo->cinfo, COL_INFO, " event %u", event);
}
