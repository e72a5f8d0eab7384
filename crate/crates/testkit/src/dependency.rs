//! Libraries that bundle other libraries: zlib vendored into a kernel and
//! a game server, and a three-level chain.

use std::io;
use std::path::{Path, PathBuf};

use vulture::clients::RepoManifest;

use crate::{ts, write_json, write_tree, HistoryBuilder};

pub const ADLER32: &str = r#"uLong adler32(uLong adler, const Bytef *buf, uInt len)
{
    unsigned long sum2;
    unsigned n;

    sum2 = (adler >> 16) & 0xffff;
    adler &= 0xffff;
    if (buf == Z_NULL)
        return 1L;
    while (len >= NMAX) {
        len -= NMAX;
        n = NMAX / 16;
        do {
            DO16(buf);
            buf += 16;
        } while (--n);
        MOD(adler);
        MOD(sum2);
    }
    while (len--) {
        adler += *buf++;
        sum2 += adler;
    }
    MOD(adler);
    MOD(sum2);
    return adler | (sum2 << 16);
}
"#;

pub const CRC32: &str = r#"unsigned long crc32(unsigned long crc, const unsigned char *buf, uInt len)
{
    if (buf == Z_NULL) return 0UL;
    crc = crc ^ 0xffffffffUL;
    while (len >= 8) {
        DO8;
        len -= 8;
    }
    if (len) do {
        crc = crc_table[0][((int)crc ^ (*buf++)) & 0xff] ^ (crc >> 8);
    } while (--len);
    return crc ^ 0xffffffffUL;
}
"#;

pub const UPDATEWINDOW: &str = r#"local int updatewindow(z_streamp strm, unsigned out)
{
    struct inflate_state FAR *state;
    unsigned copy, dist;

    state = (struct inflate_state FAR *)strm->state;
    if (state->window == Z_NULL) {
        state->window = (unsigned char FAR *)ZALLOC(strm, 1U << state->wbits, sizeof(unsigned char));
        if (state->window == Z_NULL) return 1;
    }
    if (state->wsize == 0) {
        state->wsize = 1U << state->wbits;
        state->wnext = 0;
        state->whave = 0;
    }
    copy = out - strm->avail_out;
    if (copy >= state->wsize) {
        zmemcpy(state->window, strm->next_out - state->wsize, state->wsize);
        state->wnext = 0;
        state->whave = state->wsize;
    }
    else {
        dist = state->wsize - state->wnext;
        if (dist > copy) dist = copy;
        zmemcpy(state->window + state->wnext, strm->next_out - copy, dist);
        copy -= dist;
        state->wnext += dist;
        if (state->whave < state->wsize) state->whave += dist;
    }
    return 0;
}
"#;

pub const INFLATE_RESET: &str = r#"int inflateReset(z_streamp strm)
{
    struct inflate_state FAR *state;

    if (strm == Z_NULL || strm->state == Z_NULL) return Z_STREAM_ERROR;
    state = (struct inflate_state FAR *)strm->state;
    strm->total_in = strm->total_out = state->total = 0;
    strm->msg = Z_NULL;
    strm->adler = 1;
    state->mode = HEAD;
    state->last = 0;
    state->havedict = 0;
    state->dmax = 32768U;
    state->head = Z_NULL;
    state->wsize = 0;
    state->whave = 0;
    state->wnext = 0;
    state->hold = 0;
    state->bits = 0;
    state->lencode = state->distcode = state->next = state->codes;
    Tracev((stderr, "inflate: reset\n"));
    return Z_OK;
}
"#;

pub const DEFLATE_BOUND: &str = r#"uLong deflateBound(z_streamp strm, uLong sourceLen)
{
    deflate_state *s;
    uLong complen, wraplen;

    complen = sourceLen + ((sourceLen + 7) >> 3) + ((sourceLen + 63) >> 6) + 5;
    if (strm == Z_NULL || strm->state == Z_NULL)
        return complen + 6;
    s = strm->state;
    switch (s->wrap) {
    case 0:
        wraplen = 0;
        break;
    case 1:
        wraplen = 6 + (s->strstart ? 4 : 0);
        break;
    default:
        wraplen = 6;
    }
    if (s->w_bits != 15 || s->hash_bits != 8 + 7)
        return complen + wraplen;
    return sourceLen + (sourceLen >> 12) + (sourceLen >> 14) + (sourceLen >> 25) + 13 - 6 + wraplen;
}
"#;

pub const ZLIB_FILES: [(&str, &str); 5] = [
    ("adler32.c", ADLER32),
    ("crc32.c", CRC32),
    ("inflate.c", UPDATEWINDOW),
    ("inftrees.c", INFLATE_RESET),
    ("deflate.c", DEFLATE_BOUND),
];

const SCHED: &str = r#"static void enqueue_task_fair(struct rq *rq, struct task_struct *p, int flags)
{
    struct cfs_rq *cfs_rq;
    struct sched_entity *se = &p->se;

    for_each_sched_entity(se) {
        if (se->on_rq)
            break;
        cfs_rq = cfs_rq_of(se);
        enqueue_entity(cfs_rq, se, flags);
        cfs_rq->h_nr_running++;
        flags = ENQUEUE_WAKEUP;
    }
    if (!se)
        inc_nr_running(rq);
    hrtick_update(rq);
}
"#;

const PAGE_ALLOC: &str = r#"static struct page *rmqueue_bulk_one(struct zone *zone, unsigned int order, int migratetype)
{
    struct page *page;
    unsigned long flags;

    spin_lock_irqsave(&zone->lock, flags);
    page = __rmqueue(zone, order, migratetype);
    if (!page) {
        spin_unlock_irqrestore(&zone->lock, flags);
        return NULL;
    }
    __mod_zone_page_state(zone, NR_FREE_PAGES, -(1 << order));
    spin_unlock_irqrestore(&zone->lock, flags);
    zone_statistics(zone, zone, GFP_KERNEL);
    return page;
}
"#;

const VFS_READ: &str = r#"ssize_t vfs_read(struct file *file, char __user *buf, size_t count, loff_t *pos)
{
    ssize_t ret;

    if (!(file->f_mode & FMODE_READ))
        return -EBADF;
    if (!file->f_op || (!file->f_op->read && !file->f_op->aio_read))
        return -EINVAL;
    if (unlikely(!access_ok(VERIFY_WRITE, buf, count)))
        return -EFAULT;
    ret = rw_verify_area(READ, file, pos, count);
    if (ret >= 0) {
        count = ret;
        ret = file->f_op->read(file, buf, count, pos);
        if (ret > 0)
            fsnotify_access(file);
        inc_syscr(current);
    }
    return ret;
}
"#;

const WORLD_UPDATE: &str = r#"void World::Update(uint32 diff)
{
    m_updateTime = diff;
    for (int i = 0; i < WUPDATE_COUNT; ++i)
    {
        if (m_timers[i].GetCurrent() >= 0)
            m_timers[i].Update(diff);
        else
            m_timers[i].SetCurrent(0);
    }
    if (m_timers[WUPDATE_AUCTIONS].Passed())
    {
        m_timers[WUPDATE_AUCTIONS].Reset();
        sAuctionMgr->Update();
    }
    sMapMgr->Update(diff);
    sBattlegroundMgr->Update(diff);
    UpdateSessions(diff);
}
"#;

const SESSION_HANDLE: &str = r#"void WorldSession::HandleMoveWorldportAck()
{
    if (!GetPlayer()->IsBeingTeleportedFar())
        return;
    GetPlayer()->SetSemaphoreTeleportFar(false);
    WorldLocation const& loc = GetPlayer()->GetTeleportDest();
    if (!MapManager::IsValidMapCoord(loc))
    {
        LogoutPlayer(false);
        return;
    }
    Map* newMap = sMapMgr->CreateMap(loc.GetMapId(), GetPlayer());
    if (!newMap || !newMap->CanEnter(GetPlayer()))
    {
        GetPlayer()->TeleportTo(GetPlayer()->m_homebindMapId, GetPlayer()->m_homebindX, GetPlayer()->m_homebindY, GetPlayer()->m_homebindZ, GetPlayer()->GetOrientation());
        return;
    }
    GetPlayer()->ResetMap();
    GetPlayer()->SetMap(newMap);
}
"#;

/// Rename the defining identifier of a function, as vendors do when they
/// prefix a bundled library.
pub fn prefixed(body: &str, prefix: &str) -> String {
    let open = body.find('(').expect("function");
    let start = body[..open].rfind(|c: char| !(c.is_alphanumeric() || c == '_')).map_or(0, |i| i + 1);
    format!("{}{prefix}{}", &body[..start], &body[start..])
}

/// zlib: one early import and a later release.
pub fn zlib() -> RepoManifest {
    let mut h = HistoryBuilder::new("zlib");
    let first: Vec<(&str, Option<&str>)> = ZLIB_FILES[..3].iter().map(|(p, c)| (*p, Some(*c))).collect();
    let c = h.commit(None, ts("1995-05-01T00:00:00Z"), "zlib 0.9", &first);
    h.tag("v0.9", &c);
    let rest: Vec<(&str, Option<&str>)> = ZLIB_FILES[3..].iter().map(|(p, c)| (*p, Some(*c))).collect();
    let c = h.commit(None, ts("2005-07-18T00:00:00Z"), "zlib 1.2.3", &rest);
    h.tag("v1.2.3", &c);
    h.build()
}

/// A kernel that carries its own, prefixed copy of the inflate side.
pub fn linux() -> RepoManifest {
    let mut h = HistoryBuilder::new("linux");
    let copies: Vec<(String, String)> = ZLIB_FILES
        .iter()
        .filter(|(p, _)| *p != "deflate.c")
        .map(|(p, c)| (format!("lib/zlib_inflate/{p}"), prefixed(c, "zlib_")))
        .collect();
    let mut files: Vec<(String, String)> = vec![
        ("kernel/sched/fair.c".into(), SCHED.into()),
        ("mm/page_alloc.c".into(), PAGE_ALLOC.into()),
        ("fs/read_write.c".into(), VFS_READ.into()),
    ];
    files.extend(copies);
    let refs: Vec<(&str, Option<&str>)> = files.iter().map(|(p, c)| (p.as_str(), Some(c.as_str()))).collect();
    let c = h.commit(None, ts("2007-02-04T00:00:00Z"), "Linux 2.6.20", &refs);
    h.tag("v2.6.20", &c);
    h.build()
}

/// A game server that vendors zlib verbatim next to its own code.
pub fn trinitycore() -> RepoManifest {
    let mut h = HistoryBuilder::new("trinitycore");
    let mut files: Vec<(String, String)> =
        vec![("src/server/game/World/World.cpp".into(), WORLD_UPDATE.into()), ("src/server/game/Handlers/MovementHandler.cpp".into(), SESSION_HANDLE.into())];
    files.extend(ZLIB_FILES.iter().map(|(p, c)| (format!("dep/zlib/{p}"), c.to_string())));
    let refs: Vec<(&str, Option<&str>)> = files.iter().map(|(p, c)| (p.as_str(), Some(c.as_str()))).collect();
    let c = h.commit(None, ts("2010-11-20T00:00:00Z"), "TrinityCore 3.3.5", &refs);
    h.tag("3.3.5", &c);
    h.build()
}

/// A product that vendors zlib 1.2.3 under `zlib_dir` next to its own code.
pub fn tizenrt_files(zlib_dir: &str) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = ZLIB_FILES.iter().map(|(p, c)| (format!("{zlib_dir}/{p}"), c.to_string())).collect();
    files.push((
        "os/kernel/task_create.c".into(),
        "int task_create(const char *name, int priority, int stack_size, main_t entry, char *const argv[])\n{\n    struct task_tcb_s *tcb;\n\n    tcb = (struct task_tcb_s *)kmm_zalloc(sizeof(struct task_tcb_s));\n    if (!tcb) {\n        set_errno(ENOMEM);\n        return ERROR;\n    }\n    return task_activate((struct tcb_s *)tcb);\n}\n".into(),
    ));
    files
}

/// Repository list for zlib, linux and trinitycore below `dir`.
pub fn write_zlib_family(dir: &Path) -> io::Result<PathBuf> {
    let mut entries = Vec::new();
    for m in [zlib(), linux(), trinitycore()] {
        let file = format!("{}.json", m.name);
        write_json(&dir.join(&file), &m)?;
        entries.push(serde_json::json!({ "name": m.name, "location": file, "mode": "fixture" }));
    }
    let list = dir.join("repos.json");
    write_json(&list, &entries)?;
    Ok(list)
}

pub fn write_tizenrt(root: &Path, zlib_dir: &str) -> io::Result<()> {
    write_tree(root, &tizenrt_files(zlib_dir))
}

fn chain_fn(lib: &str, n: usize) -> String {
    format!(
        "int {lib}_step{n}(struct {lib}_ctx *ctx, const unsigned char *in, size_t len)\n{{\n    size_t i;\n    unsigned acc = ctx->seed{n};\n\n    if (ctx == NULL || in == NULL)\n        return -{n};\n    for (i = 0; i < len; i++) {{\n        acc = (acc * {mul}u) ^ in[i];\n        if (acc & 0x{mask:x}u)\n            ctx->{lib}_hits += i % {m};\n    }}\n    ctx->seed{n} = acc;\n    return {lib}_finish(ctx, acc >> {n});\n}}\n",
        mul = 31 + 2 * n,
        mask = 0x100 << n,
        m = n + 3
    )
}

/// Own source files of one chain library.
pub fn chain_own(lib: &str) -> Vec<(String, String)> {
    (1..=4).map(|n| (format!("src/{lib}_{n}.c"), chain_fn(lib, n))).collect()
}

/// alpha ← beta ← gamma: each bundles its predecessor verbatim.
pub fn chain() -> Vec<RepoManifest> {
    let alpha = chain_own("alpha");
    let mut beta = chain_own("beta");
    beta.extend(alpha.iter().map(|(p, c)| (format!("third_party/alpha/{p}"), c.clone())));
    let mut gamma = chain_own("gamma");
    gamma.extend(beta.iter().map(|(p, c)| (format!("deps/beta/{p}"), c.clone())));
    [("alpha", "2001-03-01T00:00:00Z", alpha), ("beta", "2006-06-01T00:00:00Z", beta), ("gamma", "2012-09-01T00:00:00Z", gamma)]
        .into_iter()
        .map(|(name, time, files)| {
            let mut h = HistoryBuilder::new(name);
            let refs: Vec<(&str, Option<&str>)> = files.iter().map(|(p, c)| (p.as_str(), Some(c.as_str()))).collect();
            let c = h.commit(None, ts(time), "release 1.0", &refs);
            h.tag("1.0", &c);
            h.build()
        })
        .collect()
}
