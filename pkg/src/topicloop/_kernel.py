"""Numba inner loop for Gibbs sweeps.

Mirror of the pure-Python token resampling in :mod:`.sampler`.  The two
paths share one random stream and must produce bit-identical states, so
every arithmetic expression here keeps the exact shape and evaluation
order of its Python counterpart.  Potential layers are flattened into
three CSR-style buckets (per-word, per-doc, global) whose entries are
merged newest-first per token; see ``compile_potential``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np
from numba import njit

from .potentials import PotentialFunction


@dataclass
class PotentialPack:
    wl_ptr: np.ndarray
    wl_order: np.ndarray
    wl_topic: np.ndarray
    wl_doc: np.ndarray
    wl_match: np.ndarray
    wl_other: np.ndarray
    wl_has: np.ndarray
    dl_ptr: np.ndarray
    dl_order: np.ndarray
    dl_topic: np.ndarray
    dl_word: np.ndarray
    dl_match: np.ndarray
    dl_other: np.ndarray
    dl_has: np.ndarray
    gl_order: np.ndarray
    gl_topic: np.ndarray
    gl_match: np.ndarray
    gl_other: np.ndarray
    gl_has: np.ndarray

    def arrays(self) -> tuple:
        return tuple(getattr(self, f.name) for f in fields(self))


def compile_potential(pot: PotentialFunction, V: int, n_docs: int) -> PotentialPack:
    """Flatten layers into per-word, per-doc, and global entry buckets.

    Entries keep their global installation order so the kernel can walk
    all matching entries newest-first, which is exactly what
    ``PotentialFunction.lookup`` does.
    """
    word_entries: list[tuple[int, int, int, int, float, float, bool]] = []
    doc_entries: list[tuple[int, int, int, int, float, float, bool]] = []
    glob_entries: list[tuple[int, int, float, float, bool]] = []
    for order, layer in enumerate(pot.layers):
        other = 0.0 if layer.other_value is None else float(layer.other_value)
        has = layer.other_value is not None
        if layer.word is not None:
            if 0 <= layer.word < V and (layer.doc is None or 0 <= layer.doc < n_docs):
                doc = -1 if layer.doc is None else layer.doc
                word_entries.append(
                    (layer.word, order, layer.topic, doc, float(layer.match_value), other, has)
                )
        elif layer.doc is not None:
            if 0 <= layer.doc < n_docs:
                doc_entries.append(
                    (layer.doc, order, layer.topic, -1, float(layer.match_value), other, has)
                )
        else:
            glob_entries.append((order, layer.topic, float(layer.match_value), other, has))

    def csr(entries, n_buckets):
        ptr = np.zeros(n_buckets + 1, dtype=np.int64)
        for e in entries:
            ptr[e[0] + 1] += 1
        np.cumsum(ptr, out=ptr)
        fill = ptr[:-1].copy()
        n = len(entries)
        order = np.zeros(n, dtype=np.int64)
        topic = np.zeros(n, dtype=np.int64)
        extra = np.zeros(n, dtype=np.int64)
        match = np.zeros(n, dtype=np.float64)
        other = np.zeros(n, dtype=np.float64)
        has = np.zeros(n, dtype=np.bool_)
        for e in entries:  # already in ascending installation order
            pos = fill[e[0]]
            fill[e[0]] += 1
            order[pos] = e[1]
            topic[pos] = e[2]
            extra[pos] = e[3]
            match[pos] = e[4]
            other[pos] = e[5]
            has[pos] = e[6]
        return ptr, order, topic, extra, match, other, has

    wl = csr(word_entries, V)
    dl = csr(doc_entries, n_docs)
    n = len(glob_entries)
    gl_order = np.asarray([e[0] for e in glob_entries], dtype=np.int64).reshape(n)
    gl_topic = np.asarray([e[1] for e in glob_entries], dtype=np.int64).reshape(n)
    gl_match = np.asarray([e[2] for e in glob_entries], dtype=np.float64).reshape(n)
    gl_other = np.asarray([e[3] for e in glob_entries], dtype=np.float64).reshape(n)
    gl_has = np.asarray([e[4] for e in glob_entries], dtype=np.bool_).reshape(n)
    return PotentialPack(*wl, *dl, gl_order, gl_topic, gl_match, gl_other, gl_has)


@njit(cache=True)
def _collect_entries(
    w, j,
    wl_ptr, wl_order, wl_topic, wl_doc, wl_match, wl_other, wl_has,
    dl_ptr, dl_order, dl_topic, dl_word, dl_match, dl_other, dl_has,
    gl_order, gl_topic, gl_match, gl_other, gl_has,
    e_topic, e_match, e_other, e_has,
):
    a = wl_ptr[w + 1] - 1
    a_lo = wl_ptr[w]
    b = dl_ptr[j + 1] - 1
    b_lo = dl_ptr[j]
    g = gl_order.shape[0] - 1
    n = 0
    while True:
        while a >= a_lo and wl_doc[a] != -1 and wl_doc[a] != j:
            a -= 1
        while b >= b_lo and dl_word[b] != -1 and dl_word[b] != w:
            b -= 1
        ao = wl_order[a] if a >= a_lo else np.int64(-1)
        bo = dl_order[b] if b >= b_lo else np.int64(-1)
        go = gl_order[g] if g >= 0 else np.int64(-1)
        best = ao
        src = 0
        if bo > best:
            best = bo
            src = 1
        if go > best:
            best = go
            src = 2
        if best < 0:
            break
        if src == 0:
            e_topic[n] = wl_topic[a]
            e_match[n] = wl_match[a]
            e_other[n] = wl_other[a]
            e_has[n] = wl_has[a]
            a -= 1
        elif src == 1:
            e_topic[n] = dl_topic[b]
            e_match[n] = dl_match[b]
            e_other[n] = dl_other[b]
            e_has[n] = dl_has[b]
            b -= 1
        else:
            e_topic[n] = gl_topic[g]
            e_match[n] = gl_match[g]
            e_other[n] = gl_other[g]
            e_has[n] = gl_has[g]
            g -= 1
        n += 1
    return n


@njit(cache=True)
def _pot_value(k, n_e, e_topic, e_match, e_other, e_has):
    for e in range(n_e):
        if e_topic[e] == k:
            return e_match[e]
        if e_has[e]:
            return e_other[e]
    return 1.0


@njit(cache=True)
def sweep(
    tokens, doc_off, assign, tb_topic, tb_count, hw,
    n_kv, n_k, m_k, active, protected,
    seed_topic,
    counters,  # [total_tables, next_topic_row, fallback_count]
    alpha, gamma0, beta,
    wl_ptr, wl_order, wl_topic, wl_doc, wl_match, wl_other, wl_has,
    dl_ptr, dl_order, dl_topic, dl_word, dl_match, dl_other, dl_has,
    gl_order, gl_topic, gl_match, gl_other, gl_has,
    rng,
    start_doc, start_pos,
    slot_w, topic_w, occ_scratch,
    e_topic, e_match, e_other, e_has,
):
    D = doc_off.shape[0] - 1
    V = n_kv.shape[1]
    Vbeta = V * beta
    k_cap = n_kv.shape[0]
    n_gl = gl_order.shape[0]
    for j in range(start_doc, D):
        base = doc_off[j]
        L = doc_off[j + 1] - base
        i0 = start_pos if j == start_doc else 0
        for i in range(i0, L):
            if counters[1] >= k_cap:
                return np.int64(j), np.int64(i)  # caller grows topic rows, resumes here
            w = tokens[base + i]

            # -------- remove current seating --------
            slot = assign[base + i]
            if slot >= 0:
                ti = base + slot
                k_old = tb_topic[ti]
                assign[base + i] = -1
                tb_count[ti] -= 1
                n_kv[k_old, w] -= 1
                n_k[k_old] -= 1
                if tb_count[ti] == 0:
                    m_k[k_old] -= 1
                    counters[0] -= 1
                    if m_k[k_old] == 0 and not protected[k_old]:
                        active[k_old] = False
                    if slot == hw[j] - 1:
                        h = hw[j] - 1
                        while h > 0 and tb_count[base + h - 1] == 0:
                            h -= 1
                        hw[j] = h

            # -------- potential entries for this (word, doc) --------
            n_e = 0
            if n_gl > 0 or wl_ptr[w + 1] > wl_ptr[w] or dl_ptr[j + 1] > dl_ptr[j]:
                n_e = _collect_entries(
                    w, j,
                    wl_ptr, wl_order, wl_topic, wl_doc, wl_match, wl_other, wl_has,
                    dl_ptr, dl_order, dl_topic, dl_word, dl_match, dl_other, dl_has,
                    gl_order, gl_topic, gl_match, gl_other, gl_has,
                    e_topic, e_match, e_other, e_has,
                )

            # -------- weights over this doc's tables --------
            sz = seed_topic[w]
            H = hw[j]
            t_total = 0.0
            n_occ = 0
            for s in range(H):
                c = tb_count[base + s]
                wt = 0.0
                if c > 0:
                    occ_scratch[n_occ] = s
                    n_occ += 1
                    k = tb_topic[base + s]
                    if sz < 0 or k == sz:
                        p = 1.0 if n_e == 0 else _pot_value(k, n_e, e_topic, e_match, e_other, e_has)
                        if p != 0.0:
                            f = (n_kv[k, w] + beta) / (n_k[k] + Vbeta)
                            wt = c * f * p
                slot_w[s] = wt
                t_total += wt

            # -------- topic-choice weights for a new table --------
            K_hi = counters[1]
            tw_total = 0.0
            for r in range(K_hi):
                wt = 0.0
                if active[r] and (sz < 0 or r == sz):
                    p = 1.0 if n_e == 0 else _pot_value(r, n_e, e_topic, e_match, e_other, e_has)
                    if p != 0.0:
                        f = (n_kv[r, w] + beta) / (n_k[r] + Vbeta)
                        if m_k[r] > 0:
                            mass = np.float64(m_k[r])
                        else:
                            mass = gamma0
                        wt = mass * f * p
                topic_w[r] = wt
                tw_total += wt
            fresh = 0.0
            if sz < 0:
                pf = 1.0 if n_e == 0 else _pot_value(np.int64(-1), n_e, e_topic, e_match, e_other, e_has)
                fresh = gamma0 * (1.0 / V) * pf
            new_w = alpha * (tw_total + fresh) / (counters[0] + gamma0)
            grand = t_total + new_w

            # -------- draw --------
            sel_slot = np.int64(-1)
            sel_topic = np.int64(-1)
            if grand <= 0.0:
                counters[2] += 1
                if n_occ > 0:
                    u = rng.random()
                    idx = np.int64(u * n_occ)
                    if idx >= n_occ:
                        idx = n_occ - 1
                    sel_slot = occ_scratch[idx]
                    sel_topic = tb_topic[base + sel_slot]
                else:
                    n_act = 0
                    for r in range(K_hi):
                        if active[r]:
                            n_act += 1
                    if n_act > 0:
                        u = rng.random()
                        idx = np.int64(u * n_act)
                        if idx >= n_act:
                            idx = n_act - 1
                        seen = 0
                        for r in range(K_hi):
                            if active[r]:
                                if seen == idx:
                                    sel_topic = r
                                    break
                                seen += 1
                    else:
                        sel_topic = counters[1]
                        active[sel_topic] = True
                        protected[sel_topic] = False
                        counters[1] += 1
            else:
                u = rng.random() * grand
                acc = 0.0
                for s in range(H):
                    acc += slot_w[s]
                    if u < acc:
                        sel_slot = s
                        sel_topic = tb_topic[base + s]
                        break
                if sel_slot < 0:
                    topic_total = tw_total + fresh
                    u2 = rng.random() * topic_total
                    acc2 = 0.0
                    for r in range(K_hi):
                        acc2 += topic_w[r]
                        if u2 < acc2:
                            sel_topic = r
                            break
                    if sel_topic < 0:
                        sel_topic = counters[1]
                        active[sel_topic] = True
                        protected[sel_topic] = False
                        counters[1] += 1

            # -------- seat --------
            if sel_slot < 0:
                H2 = hw[j]
                sel_slot = H2
                for s in range(H2):
                    if tb_count[base + s] == 0:
                        sel_slot = s
                        break
                tb_topic[base + sel_slot] = sel_topic
                m_k[sel_topic] += 1
                counters[0] += 1
                active[sel_topic] = True
                if sel_slot >= hw[j]:
                    hw[j] = sel_slot + 1
            assign[base + i] = sel_slot
            tb_count[base + sel_slot] += 1
            n_kv[sel_topic, w] += 1
            n_k[sel_topic] += 1
    return np.int64(-1), np.int64(-1)
