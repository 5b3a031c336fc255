//! One- and two-qubit Clifford gates described by their action on Paulis.
//!
//! A gate is stored as the images of `X₁, Z₁ (, X₂, Z₂)` together with a
//! precomputed lookup that maps any local Hermitian Pauli pattern to its image
//! pattern and sign. The lookup is what the bit-sliced generator store uses to
//! update 64 rows per machine word.
//!
//! Local patterns pack `(x₁, z₁, x₂, z₂)` into bits `0..4` of a byte.

use std::sync::OnceLock;

use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliOperator};

/// Number of two-qubit Cliffords modulo global phase: `|Sp(4,2)| · 2⁴`.
pub const TWO_QUBIT_CLIFFORD_COUNT: usize = 11_520;
/// `|Sp(4,2)|`.
pub const SYMPLECTIC_GROUP_ORDER: usize = 720;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct CliffordGate {
    arity: u8,
    /// Image patterns of X₁, Z₁, X₂, Z₂.
    images: [u8; 4],
    /// Bit `i` set when image `i` carries a minus sign.
    signs: u8,
    /// Output bit `k` is the parity of `input & lin[k]`.
    lin: [u8; 4],
    /// Truth table of the sign flip picked up by each Hermitian input pattern.
    flip: u16,
    /// Algebraic normal form of `flip`.
    anf: u16,
}

impl std::fmt::Debug for CliffordGate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names = ["X1", "Z1", "X2", "Z2"];
        let mut d = f.debug_struct("CliffordGate");
        for i in 0..2 * self.arity as usize {
            d.field(names[i], &self.image(i).to_string());
        }
        d.finish()
    }
}

/// Symplectic form on local patterns.
#[inline]
pub(crate) fn symplectic_form(u: u8, v: u8) -> bool {
    let a = (u & 0b0101) & ((v & 0b1010) >> 1);
    let b = ((u & 0b1010) >> 1) & (v & 0b0101);
    (a ^ b).count_ones() & 1 == 1
}

fn pattern_of(op: &PauliOperator) -> u8 {
    let mut v = 0u8;
    for j in 0..op.num_qubits() {
        let (x, z) = op.get(j).bits();
        v |= (x as u8) << (2 * j) | (z as u8) << (2 * j + 1);
    }
    v
}

fn operator_of(arity: usize, v: u8) -> PauliOperator {
    let mut op = PauliOperator::identity(arity);
    for j in 0..arity {
        op.set(j, Pauli::from_bits((v >> (2 * j)) & 1 == 1, (v >> (2 * j + 1)) & 1 == 1));
    }
    op
}

impl CliffordGate {
    /// Builds a gate from the images of `X₁, Z₁ (, X₂, Z₂)`.
    ///
    /// Images must be Hermitian, of width equal to the arity, and satisfy the
    /// commutation relations of their preimages.
    pub fn from_images(images: &[PauliOperator]) -> Result<Self> {
        let arity = match images.len() {
            2 => 1,
            4 => 2,
            n => return Err(Error::Arity { arity: n / 2, given: n }),
        };
        let mut bits = [0u8; 4];
        let mut signs = 0u8;
        for (i, img) in images.iter().enumerate() {
            if img.num_qubits() != arity {
                return Err(Error::WidthMismatch { left: img.num_qubits(), right: arity });
            }
            if !img.is_hermitian() {
                return Err(Error::NonHermitian);
            }
            bits[i] = pattern_of(img);
            if img.phase() == 2 {
                signs |= 1 << i;
            }
        }
        Self::from_parts(arity as u8, bits, signs)
    }

    fn from_parts(arity: u8, images: [u8; 4], signs: u8) -> Result<Self> {
        let k = 2 * arity as usize;
        for i in 0..k {
            for j in 0..k {
                let want = i / 2 == j / 2 && i != j;
                if symplectic_form(images[i], images[j]) != want {
                    return Err(Error::InvalidConfig(format!(
                        "images {:?} violate the symplectic condition",
                        &images[..k]
                    )));
                }
            }
        }
        let mut lin = [0u8; 4];
        for (out, slot) in lin.iter_mut().enumerate().take(k) {
            for (i, img) in images.iter().enumerate().take(k) {
                if (img >> out) & 1 == 1 {
                    *slot |= 1 << i;
                }
            }
        }
        let img_ops: Vec<PauliOperator> = (0..k)
            .map(|i| operator_of(arity as usize, images[i]).negated_if((signs >> i) & 1 == 1))
            .collect();
        let mut flip = 0u16;
        for v in 0..(1u16 << k) {
            // σ(v) = i^{Σ x_j z_j} ∏ X_j^{x_j} Z_j^{z_j}
            let mut acc = PauliOperator::identity(arity as usize);
            let mut ys = 0u8;
            for j in 0..arity as usize {
                let (x, z) = ((v >> (2 * j)) & 1 == 1, (v >> (2 * j + 1)) & 1 == 1);
                if x {
                    acc = acc.product(&img_ops[2 * j]).expect("same width");
                }
                if z {
                    acc = acc.product(&img_ops[2 * j + 1]).expect("same width");
                }
                ys += (x && z) as u8;
            }
            let phase = (acc.phase() + ys) & 3;
            debug_assert!(phase & 1 == 0, "image of a Hermitian Pauli must be Hermitian");
            if phase == 2 {
                flip |= 1 << v;
            }
        }
        let mut anf = flip;
        for i in 0..k {
            for v in 0..(1u16 << k) {
                if v & (1 << i) != 0 {
                    let lower = (anf >> (v ^ (1 << i))) & 1;
                    anf ^= lower << v;
                }
            }
        }
        Ok(Self { arity, images, signs, lin, flip, anf })
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    /// Image of generator `i` in the order `X₁, Z₁, X₂, Z₂`.
    pub fn image(&self, i: usize) -> PauliOperator {
        assert!(i < 2 * self.arity());
        operator_of(self.arity(), self.images[i]).negated_if((self.signs >> i) & 1 == 1)
    }

    /// Symplectic part as the image patterns (sign-free).
    pub fn symplectic_images(&self) -> [u8; 4] {
        self.images
    }

    pub fn sign_bits(&self) -> u8 {
        self.signs
    }

    /// Index in `0..11520` for two-qubit gates.
    pub fn id(&self) -> Option<u16> {
        if self.arity != 2 {
            return None;
        }
        let key = symplectic_key(self.images);
        let idx = symplectic_table().index.binary_search(&key).ok()?;
        Some((idx * 16) as u16 + self.signs as u16)
    }

    /// Checks that images preserve commutation relations.
    pub fn is_symplectic(&self) -> bool {
        let k = 2 * self.arity();
        (0..k).all(|i| (0..k).all(|j| symplectic_form(self.images[i], self.images[j]) == (i / 2 == j / 2 && i != j)))
    }

    /// Image pattern and sign flip of a local Hermitian pattern.
    #[inline]
    pub fn map_pattern(&self, v: u8) -> (u8, bool) {
        let mut out = 0u8;
        for k in 0..2 * self.arity() {
            out |= (((v & self.lin[k]).count_ones() & 1) as u8) << k;
        }
        (out, (self.flip >> v) & 1 == 1)
    }

    /// Word-parallel conjugation of 64 rows at once. `w` holds the bit-slices
    /// `[x₁, z₁, x₂, z₂]`; returns the rows whose sign flips.
    #[inline(always)]
    pub(crate) fn map_words(&self, w: &mut [u64; 4]) -> u64 {
        let k = 2 * self.arity as usize;
        let input = *w;
        for (out, slot) in w.iter_mut().enumerate().take(k) {
            let mask = self.lin[out];
            let mut acc = 0u64;
            for (i, word) in input.iter().enumerate().take(k) {
                if (mask >> i) & 1 == 1 {
                    acc ^= word;
                }
            }
            *slot = acc;
        }
        let mut flip = 0u64;
        let mut anf = self.anf >> 1;
        let mut m = 1u16;
        while anf != 0 {
            if anf & 1 == 1 {
                let mut prod = !0u64;
                for (i, word) in input.iter().enumerate().take(k) {
                    if (m >> i) & 1 == 1 {
                        prod &= word;
                    }
                }
                flip ^= prod;
            }
            anf >>= 1;
            m += 1;
        }
        flip
    }

    /// Conjugates `op` by the gate acting on `targets`.
    pub fn conjugate(&self, op: &PauliOperator, targets: &[usize]) -> Result<PauliOperator> {
        check_targets(self, targets, op.num_qubits())?;
        let mut v = 0u8;
        for (j, &t) in targets.iter().enumerate() {
            let (x, z) = op.get(t).bits();
            v |= (x as u8) << (2 * j) | (z as u8) << (2 * j + 1);
        }
        let (out, flip) = self.map_pattern(v);
        let mut res = op.clone().negated_if(flip);
        for (j, &t) in targets.iter().enumerate() {
            res.set(t, Pauli::from_bits((out >> (2 * j)) & 1 == 1, (out >> (2 * j + 1)) & 1 == 1));
        }
        Ok(res)
    }

    pub fn hadamard() -> Self {
        Self::from_parts(1, [0b10, 0b01, 0, 0], 0).unwrap()
    }

    /// Phase gate `P = diag(1, i)`.
    pub fn phase() -> Self {
        Self::from_parts(1, [0b11, 0b10, 0, 0], 0).unwrap()
    }

    pub fn pauli_x() -> Self {
        Self::from_parts(1, [0b01, 0b10, 0, 0], 0b10).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::from_parts(1, [0b01, 0b10, 0, 0], 0b01).unwrap()
    }

    /// CNOT with the first target as control.
    pub fn cnot() -> Self {
        Self::from_parts(2, [0b0101, 0b0010, 0b0100, 0b1010], 0).unwrap()
    }

    pub fn swap() -> Self {
        Self::from_parts(2, [0b0100, 0b1000, 0b0001, 0b0010], 0).unwrap()
    }

    pub fn identity2() -> Self {
        Self::from_parts(2, [0b0001, 0b0010, 0b0100, 0b1000], 0).unwrap()
    }

    /// Two-qubit gate by index (`0..11520`): symplectic class `id / 16`,
    /// image signs `id % 16`.
    pub fn two_qubit_from_id(id: u16) -> Result<Self> {
        let id = id as usize;
        if id >= TWO_QUBIT_CLIFFORD_COUNT {
            return Err(Error::InvalidConfig(format!("gate id {id} out of range")));
        }
        Ok(gate_table()[id])
    }
}

pub(crate) fn check_targets(gate: &CliffordGate, targets: &[usize], n: usize) -> Result<()> {
    if targets.len() != gate.arity() {
        return Err(Error::Arity { arity: gate.arity(), given: targets.len() });
    }
    for &t in targets {
        if t >= n {
            return Err(Error::QubitOutOfRange { qubit: t, n });
        }
    }
    if targets.len() == 2 && targets[0] == targets[1] {
        return Err(Error::RepeatedTarget(targets.to_vec()));
    }
    Ok(())
}

fn symplectic_key(images: [u8; 4]) -> u16 {
    (images[0] as u16) << 12 | (images[1] as u16) << 8 | (images[2] as u16) << 4 | images[3] as u16
}

struct SymplecticTable {
    /// Sorted keys of all elements of Sp(4,2).
    index: Vec<u16>,
}

fn symplectic_table() -> &'static SymplecticTable {
    static TABLE: OnceLock<SymplecticTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut index = Vec::with_capacity(SYMPLECTIC_GROUP_ORDER);
        for c0 in 1u8..16 {
            for c1 in 1u8..16 {
                if !symplectic_form(c0, c1) {
                    continue;
                }
                for c2 in 1u8..16 {
                    if symplectic_form(c0, c2) || symplectic_form(c1, c2) {
                        continue;
                    }
                    for c3 in 1u8..16 {
                        if symplectic_form(c0, c3) || symplectic_form(c1, c3) || !symplectic_form(c2, c3) {
                            continue;
                        }
                        index.push(symplectic_key([c0, c1, c2, c3]));
                    }
                }
            }
        }
        index.sort_unstable();
        debug_assert_eq!(index.len(), SYMPLECTIC_GROUP_ORDER);
        SymplecticTable { index }
    })
}

fn gate_table() -> &'static [CliffordGate] {
    static GATES: OnceLock<Vec<CliffordGate>> = OnceLock::new();
    GATES.get_or_init(|| {
        let sym = symplectic_table();
        let mut gates = Vec::with_capacity(TWO_QUBIT_CLIFFORD_COUNT);
        for &key in &sym.index {
            let images = [(key >> 12) as u8, (key >> 8) as u8 & 15, (key >> 4) as u8 & 15, key as u8 & 15];
            for signs in 0..16u8 {
                gates.push(CliffordGate::from_parts(2, images, signs).expect("enumerated element is symplectic"));
            }
        }
        gates
    })
}

/// All 720 symplectic classes as image patterns, in index order.
pub fn symplectic_classes() -> Vec<[u8; 4]> {
    symplectic_table()
        .index
        .iter()
        .map(|&key| [(key >> 12) as u8, (key >> 8) as u8 & 15, (key >> 4) as u8 & 15, key as u8 & 15])
        .collect()
}

/// Uniform gate index in `0..11520`.
pub fn random_two_qubit_clifford_id<R: Rng + ?Sized>(rng: &mut R) -> u16 {
    rng.gen_range(0..TWO_QUBIT_CLIFFORD_COUNT as u16)
}

/// Table lookup for a two-qubit gate id; panics on ids ≥ 11520.
pub(crate) fn gate_by_id(id: u16) -> &'static CliffordGate {
    &gate_table()[id as usize]
}

/// Uniformly random two-qubit Clifford modulo global phase.
pub fn random_two_qubit_clifford<R: Rng + ?Sized>(rng: &mut R) -> CliffordGate {
    gate_table()[random_two_qubit_clifford_id(rng) as usize]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use std::collections::{HashMap, HashSet, VecDeque};

    fn op(s: &str) -> PauliOperator {
        PauliOperator::parse(s).unwrap()
    }

    #[test]
    fn elementary_gate_images() {
        let h = CliffordGate::hadamard();
        assert_eq!(h.conjugate(&op("Z"), &[0]).unwrap(), op("X"));
        assert_eq!(h.conjugate(&op("Y"), &[0]).unwrap(), op("-Y"));
        let s = CliffordGate::phase();
        assert_eq!(s.conjugate(&op("X"), &[0]).unwrap(), op("Y"));
        assert_eq!(s.conjugate(&op("Y"), &[0]).unwrap(), op("-X"));
        let cx = CliffordGate::cnot();
        assert_eq!(cx.conjugate(&op("XI"), &[0, 1]).unwrap(), op("XX"));
        assert_eq!(cx.conjugate(&op("IZ"), &[0, 1]).unwrap(), op("ZZ"));
        assert_eq!(cx.conjugate(&op("YY"), &[0, 1]).unwrap(), op("-XZ"));
        let sw = CliffordGate::swap();
        assert_eq!(sw.conjugate(&op("XZ"), &[0, 1]).unwrap(), op("ZX"));
    }

    #[test]
    fn conjugation_respects_targets_and_range() {
        let cx = CliffordGate::cnot();
        assert_eq!(cx.conjugate(&op("IXI"), &[1, 2]).unwrap(), op("IXX"));
        assert_eq!(cx.conjugate(&op("IIX"), &[2, 0]).unwrap(), op("XIX"));
        assert!(matches!(cx.conjugate(&op("II"), &[0, 2]), Err(Error::QubitOutOfRange { .. })));
        assert!(matches!(cx.conjugate(&op("II"), &[1, 1]), Err(Error::RepeatedTarget(_))));
    }

    #[test]
    fn non_symplectic_images_are_rejected() {
        assert!(CliffordGate::from_images(&[op("X"), op("X")]).is_err());
        assert!(CliffordGate::from_images(&[op("iX"), op("Z")]).is_err());
    }

    #[test]
    fn group_has_720_classes_and_ids_round_trip() {
        assert_eq!(symplectic_classes().len(), SYMPLECTIC_GROUP_ORDER);
        for id in (0..TWO_QUBIT_CLIFFORD_COUNT as u16).step_by(37) {
            let g = CliffordGate::two_qubit_from_id(id).unwrap();
            assert!(g.is_symplectic());
            assert_eq!(g.id(), Some(id));
        }
        assert!(CliffordGate::two_qubit_from_id(11_520).is_err());
    }

    /// Closure of {H₁, H₂, P₁, P₂, CNOT} acting on symplectic patterns,
    /// independent of the enumeration used by the sampler.
    fn generated_classes() -> HashSet<[u8; 4]> {
        let lift = |g: CliffordGate, slot: usize| -> [u8; 4] {
            // embed a 1-qubit map into the 2-qubit pattern space
            let mut imgs = [0b0001u8, 0b0010, 0b0100, 0b1000];
            for i in 0..2 {
                imgs[2 * slot + i] = g.images[i] << (2 * slot);
            }
            imgs
        };
        let gens: Vec<[u8; 4]> = vec![
            lift(CliffordGate::hadamard(), 0),
            lift(CliffordGate::hadamard(), 1),
            lift(CliffordGate::phase(), 0),
            lift(CliffordGate::phase(), 1),
            CliffordGate::cnot().images,
        ];
        let apply = |m: [u8; 4], v: u8| -> u8 {
            (0..4).filter(|i| (v >> i) & 1 == 1).fold(0u8, |acc, i| acc ^ m[i])
        };
        let start = [0b0001u8, 0b0010, 0b0100, 0b1000];
        let mut seen = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(m) = queue.pop_front() {
            for g in &gens {
                let next = [apply(*g, m[0]), apply(*g, m[1]), apply(*g, m[2]), apply(*g, m[3])];
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        seen
    }

    #[test]
    fn enumeration_matches_generated_group() {
        let generated = generated_classes();
        assert_eq!(generated.len(), 720);
        let enumerated: HashSet<[u8; 4]> = symplectic_classes().into_iter().collect();
        assert_eq!(generated, enumerated);
    }

    #[test]
    fn sampler_is_uniform_over_symplectic_classes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let draws = 1_000_000usize;
        let mut counts: HashMap<[u8; 4], usize> = HashMap::new();
        let mut sign_counts = [0usize; 16];
        for _ in 0..draws {
            let g = random_two_qubit_clifford(&mut rng);
            debug_assert!(g.is_symplectic());
            *counts.entry(g.images).or_default() += 1;
            sign_counts[g.signs as usize] += 1;
        }
        assert_eq!(counts.len(), 720);
        let mean = draws as f64 / 720.0;
        let sigma = mean.sqrt();
        for (class, &c) in &counts {
            assert!((c as f64 - mean).abs() < 5.0 * sigma, "class {class:?} drawn {c} times");
        }
        let chi2: f64 = counts.values().map(|&c| (c as f64 - mean).powi(2) / mean).sum();
        // 719 degrees of freedom: mean 719, sd ≈ 37.9
        assert!(chi2 < 719.0 + 5.0 * 37.9, "chi2 = {chi2}");
        let smean = draws as f64 / 16.0;
        for &c in &sign_counts {
            assert!((c as f64 - smean).abs() < 5.0 * smean.sqrt());
        }
    }

    #[test]
    fn sampler_is_deterministic_for_a_seed() {
        let mut a = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut b = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            assert_eq!(random_two_qubit_clifford(&mut a), random_two_qubit_clifford(&mut b));
        }
    }

    #[test]
    fn map_words_agrees_with_pattern_lookup() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let g = random_two_qubit_clifford(&mut rng);
            let mut w = [0u64; 4];
            for v in 0..16u64 {
                for (i, word) in w.iter_mut().enumerate() {
                    *word |= ((v >> i) & 1) << v;
                }
            }
            let flips = g.map_words(&mut w);
            for v in 0..16u8 {
                let (out, flip) = g.map_pattern(v);
                let got: u8 = (0..4).map(|i| (((w[i] >> v) & 1) as u8) << i).sum();
                assert_eq!(got, out);
                assert_eq!((flips >> v) & 1 == 1, flip);
            }
        }
    }

    #[test]
    fn images_preserve_commutation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let all: Vec<PauliOperator> = (0..16u8).map(|v| operator_of(2, v)).collect();
        for _ in 0..20 {
            let g = random_two_qubit_clifford(&mut rng);
            for a in &all {
                for b in &all {
                    let ga = g.conjugate(a, &[0, 1]).unwrap();
                    let gb = g.conjugate(b, &[0, 1]).unwrap();
                    assert_eq!(a.commutes(b).unwrap(), ga.commutes(&gb).unwrap());
                    assert!(ga.is_hermitian());
                }
            }
        }
    }
}
