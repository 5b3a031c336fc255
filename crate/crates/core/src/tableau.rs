//! Stabilizer generator sets stored column-major as bit-slices.
//!
//! Every qubit owns two bit-columns (`x` and `z`) whose bit `r` belongs to
//! generator row `r`, so a two-qubit Clifford touches four short word slices
//! and a row multiplication into an arbitrary set of rows is one masked XOR
//! per column. Signs live in a separate bit-slice.
//!
//! Two modes exist. [`Mode::Exact`] keeps signs and the rows commute and are
//! independent. [`Mode::Truncated`] is the ancilla-compressed representation:
//! rows are the system/reference parts of generators whose ancilla tails were
//! erased, they need not commute, and signs are not tracked. In truncated mode
//! the rows are only required to *span* the stored group; [`GeneratorSet::reduce`]
//! restores independence.

use rand::Rng;

use crate::clifford::{check_targets, CliffordGate};
use crate::error::{Error, Result};
use crate::pauli::{words_for, Pauli, PauliOperator, WORD};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Truncated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasurementResult {
    /// Outcome bit `b`: eigenvalue `(-1)^b`.
    pub outcome: u8,
    pub was_random: bool,
}

/// Where the outcome of a random measurement comes from.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Outcome {
    /// Replay: a deterministic measurement must agree with this bit.
    Forced(u8),
    /// Pre-drawn coin used only when the outcome is random.
    Coin(u8),
}

#[derive(Clone)]
pub struct GeneratorSet {
    n_qubits: usize,
    n_rows: usize,
    stride: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    signs: Vec<u64>,
    mode: Mode,
}

#[inline]
fn bit(words: &[u64], r: usize) -> bool {
    (words[r / WORD] >> (r % WORD)) & 1 == 1
}

#[inline]
fn lowest_set(words: &[u64]) -> Option<usize> {
    words.iter().enumerate().find(|(_, &w)| w != 0).map(|(i, &w)| i * WORD + w.trailing_zeros() as usize)
}

/// Rank of a family of bit-vectors stored back to back (`stride` words each).
fn rank_of_bitvectors(data: &mut [u64], stride: usize, count: usize, n_rows: usize) -> usize {
    let words = words_for(n_rows);
    let mut used = vec![0u64; words.max(1)];
    let mut rank = 0;
    for b in 0..count {
        let (head, tail) = data.split_at_mut((b + 1) * stride);
        let col = &head[b * stride..b * stride + words];
        let mut pivot = None;
        for w in 0..words {
            let cand = col[w] & !used[w];
            if cand != 0 {
                pivot = Some(w * WORD + cand.trailing_zeros() as usize);
                break;
            }
        }
        let Some(p) = pivot else { continue };
        rank += 1;
        used[p / WORD] |= 1 << (p % WORD);
        let targets: Vec<u64> = (0..words).map(|w| col[w] & !used[w]).collect();
        if targets.iter().all(|&t| t == 0) {
            continue;
        }
        for later in tail.chunks_exact_mut(stride).take(count - b - 1) {
            if bit(later, p) {
                for w in 0..words {
                    later[w] ^= targets[w];
                }
            }
        }
    }
    rank
}

impl GeneratorSet {
    /// Empty set (maximally mixed state) on `n_qubits`.
    pub fn new(n_qubits: usize, mode: Mode) -> Self {
        let stride = 1;
        Self {
            n_qubits,
            n_rows: 0,
            stride,
            xs: vec![0; n_qubits * stride],
            zs: vec![0; n_qubits * stride],
            signs: vec![0; stride],
            mode,
        }
    }

    /// Computational basis state `|0…0⟩`.
    pub fn zero_state(n_qubits: usize) -> Self {
        let mut g = Self::new(n_qubits, Mode::Exact);
        for q in 0..n_qubits {
            g.push_row(&PauliOperator::single(n_qubits, q, Pauli::Z)).unwrap();
        }
        g
    }

    pub fn from_rows(n_qubits: usize, rows: &[PauliOperator], mode: Mode) -> Result<Self> {
        let mut g = Self::new(n_qubits, mode);
        for r in rows {
            g.push_row(r)?;
        }
        Ok(g)
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of stored rows.
    #[inline]
    pub fn len(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    #[inline]
    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Switches to truncated mode; signs are dropped.
    pub fn make_truncated(&mut self) {
        self.mode = Mode::Truncated;
        self.signs.iter_mut().for_each(|w| *w = 0);
    }

    #[inline]
    fn tracks_signs(&self) -> bool {
        self.mode == Mode::Exact
    }

    #[inline]
    fn active_words(&self) -> usize {
        words_for(self.n_rows)
    }

    #[inline]
    fn xcol(&self, q: usize) -> &[u64] {
        &self.xs[q * self.stride..(q + 1) * self.stride]
    }

    #[inline]
    fn zcol(&self, q: usize) -> &[u64] {
        &self.zs[q * self.stride..(q + 1) * self.stride]
    }

    #[inline]
    fn get_bits(&self, q: usize, r: usize) -> (bool, bool) {
        let i = q * self.stride + r / WORD;
        let s = r % WORD;
        ((self.xs[i] >> s) & 1 == 1, (self.zs[i] >> s) & 1 == 1)
    }

    #[inline]
    fn set_bits(&mut self, q: usize, r: usize, x: bool, z: bool) {
        let i = q * self.stride + r / WORD;
        let m = 1u64 << (r % WORD);
        self.xs[i] = (self.xs[i] & !m) | if x { m } else { 0 };
        self.zs[i] = (self.zs[i] & !m) | if z { m } else { 0 };
    }

    #[inline]
    fn sign(&self, r: usize) -> bool {
        bit(&self.signs, r)
    }

    #[inline]
    fn set_sign(&mut self, r: usize, s: bool) {
        let m = 1u64 << (r % WORD);
        let w = &mut self.signs[r / WORD];
        *w = (*w & !m) | if s { m } else { 0 };
    }

    fn grow_rows(&mut self) {
        let new_stride = (self.stride * 2).max(1);
        let mut xs = vec![0u64; self.n_qubits * new_stride];
        let mut zs = vec![0u64; self.n_qubits * new_stride];
        for q in 0..self.n_qubits {
            xs[q * new_stride..q * new_stride + self.stride].copy_from_slice(self.xcol(q));
            zs[q * new_stride..q * new_stride + self.stride].copy_from_slice(self.zcol(q));
        }
        self.signs.resize(new_stride, 0);
        self.xs = xs;
        self.zs = zs;
        self.stride = new_stride;
    }

    /// Row `r` as an operator (phase `0`/`2`; always `0` in truncated mode).
    pub fn row(&self, r: usize) -> PauliOperator {
        assert!(r < self.n_rows);
        let mut op = PauliOperator::identity(self.n_qubits);
        for q in 0..self.n_qubits {
            let (x, z) = self.get_bits(q, r);
            if x || z {
                op.set(q, Pauli::from_bits(x, z));
            }
        }
        op.negated_if(self.tracks_signs() && self.sign(r))
    }

    pub fn rows(&self) -> Vec<PauliOperator> {
        (0..self.n_rows).map(|r| self.row(r)).collect()
    }

    /// Appends a generator row.
    pub fn push_row(&mut self, op: &PauliOperator) -> Result<usize> {
        if op.num_qubits() != self.n_qubits {
            return Err(Error::WidthMismatch { left: op.num_qubits(), right: self.n_qubits });
        }
        if !op.is_hermitian() {
            return Err(Error::NonHermitian);
        }
        if self.n_rows == self.stride * WORD {
            self.grow_rows();
        }
        let r = self.n_rows;
        self.n_rows += 1;
        self.write_row(r, op);
        Ok(r)
    }

    fn write_row(&mut self, r: usize, op: &PauliOperator) {
        for q in 0..self.n_qubits {
            let (x, z) = op.get(q).bits();
            self.set_bits(q, r, x, z);
        }
        let s = self.tracks_signs() && op.phase() == 2;
        self.set_sign(r, s);
    }

    /// Appends a qubit column (no new row: the qubit is maximally mixed).
    pub fn add_qubit(&mut self) -> usize {
        self.xs.resize((self.n_qubits + 1) * self.stride, 0);
        self.zs.resize((self.n_qubits + 1) * self.stride, 0);
        self.n_qubits += 1;
        self.n_qubits - 1
    }

    /// Appends a fresh qubit in `|0⟩` (row `+Z`).
    pub fn add_zero_qubit(&mut self) -> usize {
        let q = self.add_qubit();
        if self.n_rows == self.stride * WORD {
            self.grow_rows();
        }
        let r = self.n_rows;
        self.n_rows += 1;
        self.set_bits(q, r, false, true);
        self.set_sign(r, false);
        q
    }

    /// Drops the last `k` columns, erasing whatever support rows had there.
    pub fn truncate_trailing_qubits(&mut self, k: usize) {
        assert!(k <= self.n_qubits);
        self.n_qubits -= k;
        self.xs.truncate(self.n_qubits * self.stride);
        self.zs.truncate(self.n_qubits * self.stride);
    }

    /// SWAP by exchanging column data.
    pub fn swap_qubits(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let s = self.stride;
        for w in 0..s {
            self.xs.swap(a * s + w, b * s + w);
            self.zs.swap(a * s + w, b * s + w);
        }
    }

    /// Conjugates every row by `gate` acting on `targets`.
    pub fn apply_gate(&mut self, gate: &CliffordGate, targets: &[usize]) -> Result<()> {
        check_targets(gate, targets, self.n_qubits)?;
        let words = self.active_words();
        let track = self.tracks_signs();
        let s = self.stride;
        match targets {
            [a] => {
                let ia = a * s;
                for w in 0..words {
                    let mut v = [self.xs[ia + w], self.zs[ia + w], 0, 0];
                    let flip = gate.map_words(&mut v);
                    self.xs[ia + w] = v[0];
                    self.zs[ia + w] = v[1];
                    if track {
                        self.signs[w] ^= flip;
                    }
                }
            }
            [a, b] => {
                let (ia, ib) = (a * s, b * s);
                for w in 0..words {
                    let mut v = [self.xs[ia + w], self.zs[ia + w], self.xs[ib + w], self.zs[ib + w]];
                    let flip = gate.map_words(&mut v);
                    self.xs[ia + w] = v[0];
                    self.zs[ia + w] = v[1];
                    self.xs[ib + w] = v[2];
                    self.zs[ib + w] = v[3];
                    if track {
                        self.signs[w] ^= flip;
                    }
                }
            }
            _ => unreachable!("arity checked"),
        }
        Ok(())
    }

    pub fn apply_hadamard(&mut self, q: usize) -> Result<()> {
        self.apply_gate(&CliffordGate::hadamard(), &[q])
    }

    pub fn apply_phase(&mut self, q: usize) -> Result<()> {
        self.apply_gate(&CliffordGate::phase(), &[q])
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.apply_gate(&CliffordGate::cnot(), &[control, target])
    }

    /// Rows that anticommute with `op`, as a bit mask.
    pub(crate) fn anticommuting_mask(&self, op: &PauliOperator) -> Vec<u64> {
        let words = self.active_words();
        let mut mask = vec![0u64; words];
        for q in op.support() {
            let (x, z) = op.get(q).bits();
            if x {
                let zc = self.zcol(q);
                mask.iter_mut().zip(zc).for_each(|(m, c)| *m ^= c);
            }
            if z {
                let xc = self.xcol(q);
                mask.iter_mut().zip(xc).for_each(|(m, c)| *m ^= c);
            }
        }
        mask
    }

    /// Replaces every row `t` in `targets` by `row(p) · row(t)`.
    fn multiply_row_into(&mut self, p: usize, targets: &[u64]) {
        let words = targets.len();
        if targets.iter().all(|&t| t == 0) {
            return;
        }
        let track = self.tracks_signs();
        let s = self.stride;
        let (pw, pb) = (p / WORD, p % WORD);
        let mut lo = if track { vec![0u64; words] } else { Vec::new() };
        let mut hi = if track { vec![0u64; words] } else { Vec::new() };
        for q in 0..self.n_qubits {
            let base = q * s;
            let px = (self.xs[base + pw] >> pb) & 1 == 1;
            let pz = (self.zs[base + pw] >> pb) & 1 == 1;
            if !px && !pz {
                continue;
            }
            for w in 0..words {
                let t = targets[w];
                if t == 0 {
                    continue;
                }
                let rx = self.xs[base + w];
                let rz = self.zs[base + w];
                if track {
                    let (plus, minus) = match (px, pz) {
                        (true, false) => (rx & rz, !rx & rz),
                        (true, true) => (!rx & rz, rx & !rz),
                        _ => (rx & !rz, rx & rz),
                    };
                    let plus = plus & t;
                    let minus = minus & t;
                    let carry = lo[w] & plus;
                    lo[w] ^= plus;
                    hi[w] ^= carry;
                    let borrow = !lo[w] & minus;
                    lo[w] ^= minus;
                    hi[w] ^= borrow;
                }
                if px {
                    self.xs[base + w] = rx ^ t;
                }
                if pz {
                    self.zs[base + w] = rz ^ t;
                }
            }
        }
        if track {
            let ps = if self.sign(p) { !0u64 } else { 0 };
            for w in 0..words {
                debug_assert_eq!(lo[w] & targets[w], 0, "product of anticommuting rows in exact mode");
                self.signs[w] ^= (hi[w] ^ ps) & targets[w];
            }
        }
    }

    /// Moves the last row into slot `r` and shrinks by one.
    fn swap_remove_row(&mut self, r: usize) {
        let last = self.n_rows - 1;
        if r != last {
            for q in 0..self.n_qubits {
                let (x, z) = self.get_bits(q, last);
                self.set_bits(q, r, x, z);
            }
            let s = self.sign(last);
            self.set_sign(r, s);
        }
        for q in 0..self.n_qubits {
            self.set_bits(q, last, false, false);
        }
        self.set_sign(last, false);
        self.n_rows -= 1;
    }

    /// Removes the rows flagged in `mask`.
    fn remove_rows(&mut self, mask: &[u64]) -> usize {
        let mut doomed: Vec<usize> = Vec::new();
        for (w, &m) in mask.iter().enumerate() {
            let mut m = m;
            while m != 0 {
                doomed.push(w * WORD + m.trailing_zeros() as usize);
                m &= m - 1;
            }
        }
        doomed.retain(|&r| r < self.n_rows);
        for &r in doomed.iter().rev() {
            self.swap_remove_row(r);
        }
        doomed.len()
    }

    /// Eliminates the given columns (X then Z per qubit) and deletes every
    /// row left with support on them. Returns the number of deleted rows.
    pub(crate) fn eliminate_and_drop(&mut self, cols: &[usize]) -> usize {
        let words = self.active_words();
        let mut used = vec![0u64; words];
        for &q in cols {
            for block in 0..2 {
                let col = if block == 0 { self.xcol(q) } else { self.zcol(q) };
                let cand: Vec<u64> = (0..words).map(|w| col[w] & !used[w]).collect();
                let Some(p) = lowest_set(&cand) else { continue };
                used[p / WORD] |= 1 << (p % WORD);
                let targets: Vec<u64> = (0..words).map(|w| cand[w] & !used[w]).collect();
                self.multiply_row_into(p, &targets);
            }
        }
        self.remove_rows(&used)
    }

    /// Partial trace over the trailing `k` qubits; their columns are removed.
    pub fn trace_out_trailing(&mut self, k: usize) -> usize {
        let cols: Vec<usize> = (self.n_qubits - k..self.n_qubits).collect();
        let dropped = self.eliminate_and_drop(&cols);
        self.truncate_trailing_qubits(k);
        dropped
    }

    /// Partial trace over `discard`. The result lives on the remaining qubits
    /// in ascending order.
    pub fn trace_out(&self, discard: &[usize]) -> Result<GeneratorSet> {
        for &q in discard {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n: self.n_qubits });
            }
        }
        let mut work = self.clone();
        work.eliminate_and_drop(discard);
        let keep: Vec<usize> = (0..self.n_qubits).filter(|q| !discard.contains(q)).collect();
        let mut out = GeneratorSet::new(keep.len(), self.mode);
        for r in 0..work.n_rows {
            out.push_row(&work.row(r).restrict(&keep))?;
        }
        Ok(out)
    }

    /// Row-reduces over GF(2) with pivots taken per qubit in `order` (X before
    /// Z), lowest row index first. Only row products are used, so the
    /// generated group is unchanged; rows that become the identity are
    /// removed. Pivot rows come first, in pivot order.
    pub fn gaussian_eliminate(&mut self, order: &[usize]) -> Result<()> {
        for &q in order {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n: self.n_qubits });
            }
        }
        let words = self.active_words();
        let mut used = vec![0u64; words];
        let mut pivots = Vec::new();
        for &q in order {
            for block in 0..2 {
                let col: Vec<u64> = if block == 0 { self.xcol(q)[..words].to_vec() } else { self.zcol(q)[..words].to_vec() };
                let cand: Vec<u64> = (0..words).map(|w| col[w] & !used[w]).collect();
                let Some(p) = lowest_set(&cand) else { continue };
                used[p / WORD] |= 1 << (p % WORD);
                pivots.push(p);
                let mut targets = col;
                targets[p / WORD] &= !(1 << (p % WORD));
                self.multiply_row_into(p, &targets);
            }
        }
        let mut ordered: Vec<PauliOperator> = pivots.iter().map(|&p| self.row(p)).collect();
        for r in 0..self.n_rows {
            if !bit(&used, r) {
                let row = self.row(r);
                if !row.is_identity() {
                    ordered.push(row);
                }
            }
        }
        let mut rebuilt = GeneratorSet::new(self.n_qubits, self.mode);
        for op in &ordered {
            rebuilt.push_row(op)?;
        }
        *self = rebuilt;
        Ok(())
    }

    /// GF(2) rank of the rows restricted to `qubits`.
    pub fn rank_on(&self, qubits: &[usize]) -> usize {
        let words = self.active_words();
        if words == 0 {
            return 0;
        }
        let count = 2 * qubits.len();
        let mut data = vec![0u64; count * words];
        for (k, &q) in qubits.iter().enumerate() {
            data[2 * k * words..(2 * k + 1) * words].copy_from_slice(&self.xcol(q)[..words]);
            data[(2 * k + 1) * words..(2 * k + 2) * words].copy_from_slice(&self.zcol(q)[..words]);
        }
        rank_of_bitvectors(&mut data, words, count, self.n_rows)
    }

    /// GF(2) rank of all rows.
    pub fn rank(&self) -> usize {
        if self.mode == Mode::Exact {
            return self.n_rows;
        }
        let all: Vec<usize> = (0..self.n_qubits).collect();
        self.rank_on(&all)
    }

    /// Deletes rows that are GF(2)-dependent on earlier pivots (including
    /// identity rows). Returns how many were removed.
    pub fn reduce(&mut self) -> usize {
        let words = self.active_words();
        if words == 0 {
            return 0;
        }
        let count = 2 * self.n_qubits;
        let mut data = vec![0u64; count * words];
        for q in 0..self.n_qubits {
            data[2 * q * words..(2 * q + 1) * words].copy_from_slice(&self.xcol(q)[..words]);
            data[(2 * q + 1) * words..(2 * q + 2) * words].copy_from_slice(&self.zcol(q)[..words]);
        }
        let mut used = vec![0u64; words];
        for b in 0..count {
            let (head, tail) = data.split_at_mut((b + 1) * words);
            let col = &head[b * words..];
            let cand: Vec<u64> = (0..words).map(|w| col[w] & !used[w]).collect();
            let Some(p) = lowest_set(&cand) else { continue };
            used[p / WORD] |= 1 << (p % WORD);
            let targets: Vec<u64> = (0..words).map(|w| col[w] & !used[w]).collect();
            if targets.iter().all(|&t| t == 0) {
                continue;
            }
            for later in tail.chunks_exact_mut(words) {
                if bit(later, p) {
                    later.iter_mut().zip(&targets).for_each(|(l, t)| *l ^= t);
                }
            }
        }
        let mut dependent = used;
        dependent.iter_mut().for_each(|w| *w = !*w);
        let tail_bits = self.n_rows % WORD;
        if tail_bits != 0 {
            dependent[words - 1] &= (1u64 << tail_bits) - 1;
        }
        self.remove_rows(&dependent)
    }

    /// Finds `±op` in the generated group (exact mode). Returns the sign bit
    /// `t` with `∏ rows = (-1)^t σ(op)`.
    fn group_sign_of(&self, op: &PauliOperator) -> Option<bool> {
        let n = self.n_qubits;
        let ow = words_for(n);
        let rw = words_for(self.n_rows).max(1);
        let mut rows: Vec<(Vec<u64>, Vec<u64>)> = (0..self.n_rows)
            .map(|r| {
                let mut v = vec![0u64; 2 * ow];
                for q in 0..n {
                    let (x, z) = self.get_bits(q, r);
                    v[q / WORD] |= (x as u64) << (q % WORD);
                    v[ow + q / WORD] |= (z as u64) << (q % WORD);
                }
                let mut tag = vec![0u64; rw];
                tag[r / WORD] |= 1 << (r % WORD);
                (v, tag)
            })
            .collect();
        let mut target: Vec<u64> = op.x_words().iter().chain(op.z_words()).copied().collect();
        let mut combo = vec![0u64; rw];
        let mut next = 0;
        for b in 0..2 * n {
            let w = if b < n { b / WORD } else { ow + (b - n) / WORD };
            let s = if b < n { b % WORD } else { (b - n) % WORD };
            let Some(pi) = (next..rows.len()).find(|&i| (rows[i].0[w] >> s) & 1 == 1) else { continue };
            rows.swap(next, pi);
            let (pv, pt) = rows[next].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != next && (row.0[w] >> s) & 1 == 1 {
                    row.0.iter_mut().zip(&pv).for_each(|(a, b)| *a ^= b);
                    row.1.iter_mut().zip(&pt).for_each(|(a, b)| *a ^= b);
                }
            }
            if (target[w] >> s) & 1 == 1 {
                target.iter_mut().zip(&pv).for_each(|(a, b)| *a ^= b);
                combo.iter_mut().zip(&pt).for_each(|(a, b)| *a ^= b);
            }
            next += 1;
        }
        if target.iter().any(|&t| t != 0) {
            return None;
        }
        let mut acc = PauliOperator::identity(n);
        for r in 0..self.n_rows {
            if bit(&combo, r) {
                acc = acc.product(&self.row(r)).expect("same width");
            }
        }
        debug_assert!(acc.same_string(op));
        debug_assert!(acc.is_hermitian());
        Some(acc.phase() == 2)
    }

    /// Whether `op` (up to sign) lies in the span of the rows.
    pub fn contains_string(&self, op: &PauliOperator) -> bool {
        let mut probe = self.clone();
        probe.mode = Mode::Truncated;
        let before = probe.rank();
        probe.push_row(&op.clone().with_phase(0)).expect("width checked by caller");
        probe.rank() == before
    }

    /// Measures the Hermitian Pauli `op`.
    ///
    /// (i) `±op` in the group: deterministic, state unchanged; (ii) `op`
    /// commutes with every row but is not in the group: random, `±op` added;
    /// (iii) `op` anticommutes with some rows: the lowest such row is
    /// multiplied into the others and then replaced by `±op`. A `forced`
    /// outcome selects the branch and must agree with a deterministic result.
    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        op: &PauliOperator,
        forced: Option<u8>,
        rng: &mut R,
    ) -> Result<MeasurementResult> {
        if op.num_qubits() != self.n_qubits {
            return Err(Error::WidthMismatch { left: op.num_qubits(), right: self.n_qubits });
        }
        if !op.is_hermitian() {
            return Err(Error::NonHermitian);
        }
        match forced {
            Some(b) => self.measure_with(op, Outcome::Forced(b & 1)),
            // drawn lazily so that deterministic measurements consume nothing
            None => self.measure_inner(op, &mut || Outcome::Coin(rng.gen::<bool>() as u8)),
        }
    }

    pub(crate) fn measure_with(&mut self, op: &PauliOperator, source: Outcome) -> Result<MeasurementResult> {
        self.measure_inner(op, &mut || source)
    }

    fn measure_inner(&mut self, op: &PauliOperator, source: &mut dyn FnMut() -> Outcome) -> Result<MeasurementResult> {
        let anti = self.anticommuting_mask(op);
        let op_sign = op.phase() == 2;
        if let Some(p) = lowest_set(&anti) {
            let mut targets = anti;
            targets[p / WORD] &= !(1 << (p % WORD));
            self.multiply_row_into(p, &targets);
            let b = match source() {
                Outcome::Forced(b) | Outcome::Coin(b) => b,
            };
            let new_row = op.clone().with_phase(0).negated_if(op_sign ^ (b == 1));
            self.write_row(p, &new_row);
            return Ok(MeasurementResult { outcome: b, was_random: true });
        }
        if self.mode == Mode::Truncated {
            // Commuting case: append; a redundant row is removed by `reduce`.
            let b = match source() {
                Outcome::Forced(b) => b,
                Outcome::Coin(_) => 0,
            };
            self.push_row(&op.clone().with_phase(0))?;
            return Ok(MeasurementResult { outcome: b, was_random: false });
        }
        match self.group_sign_of(op) {
            Some(t) => {
                let determined = (t ^ op_sign) as u8;
                if let Outcome::Forced(b) = source() {
                    if b != determined {
                        return Err(Error::Contradiction { forced: b, determined });
                    }
                }
                Ok(MeasurementResult { outcome: determined, was_random: false })
            }
            None => {
                let b = match source() {
                    Outcome::Forced(b) | Outcome::Coin(b) => b,
                };
                let new_row = op.clone().with_phase(0).negated_if(op_sign ^ (b == 1));
                self.push_row(&new_row)?;
                Ok(MeasurementResult { outcome: b, was_random: true })
            }
        }
    }

    /// Von Neumann entropy (bits) of the reduced state on `qubits`:
    /// `|M| − |G_M|` with `|G_M| = rank − rank(rows restricted to Mᶜ)`.
    pub fn subsystem_entropy(&self, qubits: &[usize]) -> usize {
        let comp: Vec<usize> = (0..self.n_qubits).filter(|q| !qubits.contains(q)).collect();
        let inside = self.rank() - self.rank_on(&comp);
        qubits.len() - inside
    }

    /// Whether all rows pairwise commute.
    pub fn rows_commute(&self) -> bool {
        let rows = self.rows();
        rows.iter().enumerate().all(|(i, a)| rows[i + 1..].iter().all(|b| a.commutes(b).unwrap()))
    }

    /// Whether the rows are GF(2)-independent.
    pub fn rows_independent(&self) -> bool {
        let all: Vec<usize> = (0..self.n_qubits).collect();
        self.rank_on(&all) == self.n_rows
    }
}

impl std::fmt::Debug for GeneratorSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeneratorSet")
            .field("mode", &self.mode)
            .field("n_qubits", &self.n_qubits)
            .field("rows", &self.rows().iter().map(|r| r.to_string()).collect::<Vec<_>>())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::random_two_qubit_clifford;
    use crate::dense::{PureState, Role};
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
        (0..n).filter(|_| rng.gen::<bool>()).collect()
    }

    /// Random Clifford circuit with interleaved Z measurements, run on both
    /// simulators with the stabilizer outcomes forced on the dense side.
    fn lockstep(seed: u64, n: usize, steps: usize) -> (GeneratorSet, PureState) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gs = GeneratorSet::zero_state(n);
        let mut ds = PureState::zero(&vec![Role::System; n]).unwrap();
        for _ in 0..steps {
            let a = rng.gen_range(0..n);
            let b = (a + rng.gen_range(1..n)) % n;
            let g = random_two_qubit_clifford(&mut rng);
            gs.apply_gate(&g, &[a, b]).unwrap();
            ds.apply_clifford(&g, &[a, b]).unwrap();
            if rng.gen::<f64>() < 0.3 {
                let q = rng.gen_range(0..n);
                let z = PauliOperator::single(n, q, Pauli::Z);
                let r = gs.measure_pauli(&z, None, &mut rng).unwrap();
                let d = ds.measure_pauli(&z, Some(r.outcome), &mut rng).unwrap();
                assert_eq!(r.was_random, d.was_random);
            }
        }
        (gs, ds)
    }

    fn stabilizes(gs: &GeneratorSet, ds: &PureState) -> bool {
        gs.rows().iter().all(|r| (ds.expectation(r).unwrap() - 1.0).abs() < 1e-9)
    }

    #[test]
    fn lockstep_with_dense_state() {
        for seed in 0..60 {
            let n = 2 + (seed as usize % 5);
            let (gs, ds) = lockstep(seed, n, 40);
            assert_eq!(gs.len(), n);
            assert!(gs.rows_commute() && gs.rows_independent());
            assert!(stabilizes(&gs, &ds));
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
            for _ in 0..5 {
                let m = random_subset(&mut rng, n);
                let d = ds.reduced_entropy(&m);
                assert!((d - gs.subsystem_entropy(&m) as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn deterministic_outcomes_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for seed in 0..40 {
            let n = 3;
            let (mut gs, ds) = lockstep(seed, n, 20);
            for _ in 0..10 {
                let mut op = PauliOperator::identity(n);
                for q in 0..n {
                    op.set(q, Pauli::from_bits(rng.gen(), rng.gen()));
                }
                let op = op.negated_if(rng.gen());
                let p0 = ds.branch_probability(&op, 0).unwrap();
                let mut probe = gs.clone();
                let r = probe.measure_pauli(&op, None, &mut rng).unwrap();
                if r.was_random {
                    assert!((p0 - 0.5).abs() < 1e-9);
                } else {
                    assert!((p0 - if r.outcome == 0 { 1.0 } else { 0.0 }).abs() < 1e-9);
                    let wrong = 1 - r.outcome;
                    assert!(matches!(
                        gs.measure_pauli(&op, Some(wrong), &mut rng),
                        Err(Error::Contradiction { .. })
                    ));
                }
            }
        }
    }

    #[test]
    fn measurement_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut g = GeneratorSet::zero_state(1);
        assert_eq!(g.measure_pauli(&PauliOperator::parse("Z").unwrap(), None, &mut rng).unwrap().outcome, 0);
        assert_eq!(g.measure_pauli(&PauliOperator::parse("-Z").unwrap(), None, &mut rng).unwrap().outcome, 1);
        let r = g.measure_pauli(&PauliOperator::parse("X").unwrap(), Some(1), &mut rng).unwrap();
        assert!(r.was_random);
        assert_eq!(g.rows()[0].to_string(), "-X");
        let mut bell = GeneratorSet::from_rows(2, &[PauliOperator::parse("XX").unwrap(), PauliOperator::parse("ZZ").unwrap()], Mode::Exact).unwrap();
        assert_eq!(bell.subsystem_entropy(&[0]), 1);
        let r = bell.measure_pauli(&PauliOperator::parse("ZI").unwrap(), Some(1), &mut rng).unwrap();
        assert!(r.was_random);
        let r = bell.measure_pauli(&PauliOperator::parse("IZ").unwrap(), None, &mut rng).unwrap();
        assert_eq!(r, MeasurementResult { outcome: 1, was_random: false });
        assert!(matches!(
            bell.measure_pauli(&PauliOperator::parse("iZZ").unwrap(), None, &mut rng),
            Err(Error::NonHermitian)
        ));
        // mixed state: commuting operator outside the group is random and added
        let mut mixed = GeneratorSet::new(2, Mode::Exact);
        let r = mixed.measure_pauli(&PauliOperator::parse("ZZ").unwrap(), Some(0), &mut rng).unwrap();
        assert!(r.was_random);
        assert_eq!(mixed.len(), 1);
    }

    #[test]
    fn gaussian_elimination_keeps_group_and_state() {
        for seed in 0..30 {
            let n = 5;
            let (mut gs, ds) = lockstep(seed, n, 30);
            let before = gs.clone();
            let mut order: Vec<usize> = (0..n).collect();
            order.rotate_left(seed as usize % n);
            gs.gaussian_eliminate(&order).unwrap();
            assert_eq!(gs.len(), n);
            assert!(stabilizes(&gs, &ds));
            for r in before.rows() {
                assert!(gs.group_sign_of(&r).is_some());
            }
            // echelon: pivot qubit of row k never appears in other rows' pivot slot
            let rows = gs.rows();
            let mut used = Vec::new();
            for &q in &order {
                for block in 0..2 {
                    let has = |r: &PauliOperator| {
                        let (x, z) = r.get(q).bits();
                        if block == 0 { x } else { z }
                    };
                    let holders: Vec<usize> = (0..rows.len()).filter(|&i| has(&rows[i])).collect();
                    let fresh: Vec<usize> = holders.iter().copied().filter(|i| !used.contains(i)).collect();
                    if let Some(&p) = fresh.first() {
                        assert_eq!(holders, vec![p]);
                        used.push(p);
                    }
                }
            }
        }
    }

    #[test]
    fn elimination_drops_redundant_rows() {
        let rows: Vec<PauliOperator> = ["XXI", "IZZ", "XYZ"].iter().map(|s| PauliOperator::parse(s).unwrap()).collect();
        let mut gs = GeneratorSet::from_rows(3, &rows, Mode::Truncated).unwrap();
        assert_eq!(gs.rank(), 2);
        gs.gaussian_eliminate(&[0, 1, 2]).unwrap();
        assert_eq!(gs.len(), 2);
        let mut t = GeneratorSet::from_rows(3, &rows, Mode::Truncated).unwrap();
        assert_eq!(t.reduce(), 1);
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn trace_out_matches_dense_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..30 {
            let n = 6;
            let (gs, ds) = lockstep(seed, n, 40);
            let discard = random_subset(&mut rng, n);
            let kept: Vec<usize> = (0..n).filter(|q| !discard.contains(q)).collect();
            let mixed = gs.trace_out(&discard).unwrap();
            assert_eq!(mixed.num_qubits(), kept.len());
            assert!(mixed.rows_commute() && mixed.rows_independent());
            let sub = random_subset(&mut rng, kept.len());
            let orig: Vec<usize> = sub.iter().map(|&i| kept[i]).collect();
            assert!((ds.reduced_entropy(&orig) - mixed.subsystem_entropy(&sub) as f64).abs() < 1e-9);
            assert!((ds.reduced_entropy(&kept) - mixed.subsystem_entropy(&(0..kept.len()).collect::<Vec<_>>()) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn trailing_trace_out_and_swap() {
        let mut g = GeneratorSet::zero_state(2);
        g.apply_hadamard(0).unwrap();
        g.apply_cnot(0, 1).unwrap();
        let e = g.add_zero_qubit();
        g.swap_qubits(0, e);
        g.trace_out_trailing(1);
        assert_eq!(g.num_qubits(), 2);
        assert_eq!(g.rows().iter().map(|r| r.to_string()).collect::<Vec<_>>(), vec!["+ZI".to_string()]);
        assert_eq!(g.subsystem_entropy(&[1]), 1);
    }

    #[test]
    fn out_of_range_and_mismatch_errors() {
        let mut g = GeneratorSet::zero_state(2);
        assert!(matches!(g.apply_hadamard(2), Err(Error::QubitOutOfRange { .. })));
        assert!(matches!(g.apply_cnot(1, 1), Err(Error::RepeatedTarget(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            g.measure_pauli(&PauliOperator::parse("ZZZ").unwrap(), None, &mut rng),
            Err(Error::WidthMismatch { .. })
        ));
        assert!(g.gaussian_eliminate(&[3]).is_err());
    }

    #[test]
    fn many_rows_span_several_words() {
        let n = 150;
        let mut g = GeneratorSet::zero_state(n);
        for q in 0..n - 1 {
            g.apply_hadamard(q).unwrap();
            g.apply_cnot(q, q + 1).unwrap();
        }
        assert!(g.rows_commute() && g.rows_independent());
        let half: Vec<usize> = (0..75).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for q in (0..n).step_by(7) {
            g.measure_pauli(&PauliOperator::single(n, q, Pauli::X), None, &mut rng).unwrap();
        }
        assert!(g.rows_commute() && g.rows_independent());
        assert!(g.subsystem_entropy(&half) <= 75);
        assert_eq!(g.len(), n);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn exact_mode_invariants(seed in any::<u64>(), n in 2usize..9, steps in 0usize..60) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut g = GeneratorSet::zero_state(n);
            for _ in 0..steps {
                match rng.gen_range(0..3) {
                    0 => {
                        let a = rng.gen_range(0..n);
                        let b = (a + rng.gen_range(1..n)) % n;
                        g.apply_gate(&random_two_qubit_clifford(&mut rng), &[a, b]).unwrap();
                    }
                    1 => {
                        let q = rng.gen_range(0..n);
                        g.measure_pauli(&PauliOperator::single(n, q, Pauli::Z), None, &mut rng).unwrap();
                    }
                    _ => {
                        let e = g.add_zero_qubit();
                        let q = rng.gen_range(0..n);
                        g.swap_qubits(q, e);
                        g.trace_out_trailing(1);
                    }
                }
                prop_assert!(g.rows_commute());
                prop_assert!(g.rows_independent());
                prop_assert!(g.len() <= n);
                let all: Vec<usize> = (0..n).collect();
                let m = random_subset(&mut rng, n);
                let comp: Vec<usize> = all.iter().copied().filter(|q| !m.contains(q)).collect();
                let s = g.subsystem_entropy(&m);
                prop_assert!(s <= m.len());
                // Araki-Lieb style check: |S(M) - S(Mᶜ)| ≤ S(total)
                let total = g.subsystem_entropy(&all);
                prop_assert!((s as i64 - g.subsystem_entropy(&comp) as i64).unsigned_abs() as usize <= total);
            }
        }

        #[test]
        fn truncated_rank_formula_matches_exact(seed in any::<u64>(), n in 2usize..8) {
            let (gs, _) = lockstep(seed, n, 30);
            let mut t = gs.clone();
            t.make_truncated();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
            // duplicate some products to make the set redundant
            for _ in 0..3 {
                let a = rng.gen_range(0..gs.len());
                let b = rng.gen_range(0..gs.len());
                let p = gs.row(a).product(&gs.row(b)).unwrap().with_phase(0);
                t.push_row(&p).unwrap();
            }
            let m = random_subset(&mut rng, n);
            prop_assert_eq!(t.subsystem_entropy(&m), gs.subsystem_entropy(&m));
            t.reduce();
            prop_assert_eq!(t.len(), gs.len());
        }
    }
}
