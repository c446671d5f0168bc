//! Latent position models and graph sampling.
//!
//! A latent distribution here is a finite mixture of point masses in R^d
//! whose pairwise inner products are valid edge probabilities. Sampling a
//! graph draws one latent position per vertex i.i.d. from the mixture, then
//! flips an independent coin per vertex pair with probability equal to the
//! inner product of the endpoints' positions. The adjacency matrix is
//! symmetric and hollow, stored as a bit-packed upper triangle so graphs up
//! to a few tens of thousands of vertices fit comfortably in memory.

use std::fmt;
use std::io::{BufRead, Write};

use rand::distr::{Bernoulli, Distribution};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{dense_symmetric_eigen, SymOp};
use crate::mat::{dot, Mat};
use crate::rng;

/// Finite point-mass mixture of latent positions. `atoms` is K x d, one row
/// per support point; `weights` the mixing probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentDistribution {
    atoms: Mat,
    weights: Vec<f64>,
    /// Pairwise inner products of atoms, clamped to [0, 1]; these are the
    /// block edge probabilities.
    gram: Mat,
}

impl LatentDistribution {
    /// Validates and builds a mixture. Weights must be positive and sum to
    /// one within 1e-12; atoms must be pairwise distinct with all pairwise
    /// inner products (including self) inside [0, 1].
    pub fn new(atoms: Mat, weights: Vec<f64>) -> Result<Self> {
        let k = atoms.rows();
        if k == 0 || atoms.cols() == 0 {
            return Err(Error::Domain(
                "need at least one atom with dimension >= 1".into(),
            ));
        }
        if weights.len() != k {
            return Err(Error::Domain(format!(
                "{} weights for {} atoms",
                weights.len(),
                k
            )));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Domain("weights must be positive".into()));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("weights sum to {s}, not 1")));
        }
        for a in 0..k {
            for b in (a + 1)..k {
                let d2: f64 = atoms
                    .row(a)
                    .iter()
                    .zip(atoms.row(b))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                if d2 < 1e-24 {
                    return Err(Error::Domain(format!("atoms {a} and {b} coincide")));
                }
            }
        }
        let mut gram = Mat::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                let p = dot(atoms.row(a), atoms.row(b));
                if !(-1e-12..=1.0 + 1e-12).contains(&p) {
                    return Err(Error::Domain(format!(
                        "inner product of atoms {a} and {b} is {p}, outside [0, 1]"
                    )));
                }
                gram[(a, b)] = p.clamp(0.0, 1.0);
            }
        }
        Ok(LatentDistribution {
            atoms,
            weights,
            gram,
        })
    }

    pub fn dim(&self) -> usize {
        self.atoms.cols()
    }

    /// Number of mixture components (blocks).
    pub fn num_blocks(&self) -> usize {
        self.atoms.rows()
    }

    pub fn atoms(&self) -> &Mat {
        &self.atoms
    }

    pub fn atom(&self, k: usize) -> &[f64] {
        self.atoms.row(k)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Block edge probability matrix: gram[k][l] = <atom_k, atom_l>.
    pub fn gram(&self) -> &Mat {
        &self.gram
    }
}

/// Single-atom mixture at sqrt(p): every edge appears independently with
/// probability p. `p` must lie strictly inside (0, 1).
pub fn erdos_renyi_distribution(p: f64) -> Result<LatentDistribution> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "edge probability {p} outside (0, 1)"
        )));
    }
    LatentDistribution::new(Mat::from_rows(&[vec![p.sqrt()]]), vec![1.0])
}

/// Factors a block probability matrix into latent atoms: B = Q Λ Qᵀ with
/// eigenvalues descending, atoms the rows of Q Λ^{1/2}. Each eigenvector's
/// sign is fixed so its last entry is non-negative, which pins an otherwise
/// arbitrary reflection and keeps factorizations reproducible.
///
/// B must be symmetric with entries in [0, 1] and strictly positive
/// definite: eigenvalues below -1e-10 are rejected as `NotPsd`, eigenvalues
/// within 1e-10 of zero as `RankDeficient`.
pub fn sbm_to_latent(b: &Mat, pi: &[f64]) -> Result<LatentDistribution> {
    if !b.is_square() || b.rows() == 0 {
        return Err(Error::Domain(
            "block matrix must be square and non-empty".into(),
        ));
    }
    let k = b.rows();
    if pi.len() != k {
        return Err(Error::Domain(format!(
            "{} block weights for {k} blocks",
            pi.len()
        )));
    }
    for i in 0..k {
        for j in 0..k {
            if !(0.0..=1.0).contains(&b[(i, j)]) {
                return Err(Error::Domain(format!(
                    "block probability ({i},{j}) = {} outside [0, 1]",
                    b[(i, j)]
                )));
            }
            if (b[(i, j)] - b[(j, i)]).abs() > 1e-12 {
                return Err(Error::NotSymmetric("block matrix".into()));
            }
        }
    }
    let eig = dense_symmetric_eigen(b)?;
    if let Some(&lam) = eig.values.iter().find(|&&v| v < -1e-10) {
        return Err(Error::NotPsd(format!("block matrix eigenvalue {lam}")));
    }
    if let Some(&lam) = eig.values.iter().find(|&&v| v.abs() <= 1e-10) {
        return Err(Error::RankDeficient(format!(
            "block matrix eigenvalue {lam} is numerically zero"
        )));
    }
    let mut atoms = Mat::zeros(k, k);
    for j in 0..k {
        let flip = if eig.vectors[(k - 1, j)] < 0.0 {
            -1.0
        } else {
            1.0
        };
        let root = eig.values[j].sqrt();
        for i in 0..k {
            atoms[(i, j)] = flip * eig.vectors[(i, j)] * root;
        }
    }
    let dist = LatentDistribution::new(atoms, pi.to_vec())?;
    // The factorization must reproduce B; if it does not, the
    // eigendecomposition was not trustworthy.
    let err = dist.gram.sub(b).max_abs();
    if err > 1e-10 {
        return Err(Error::NoConvergence {
            what: "block matrix factorization".into(),
            residuals: vec![err],
        });
    }
    Ok(dist)
}

/// Second through fourth moments of a latent distribution. `m3`/`m4` are
/// only defined for one-dimensional mixtures. `near_degenerate` flags
/// second-moment eigenvalues within 1e-8 of each other, where the smallest
/// eigenvalue's eigenvector (and anything scaled by the spectral gap) stops
/// being well determined.
#[derive(Clone, Debug)]
pub struct MomentSet {
    /// Delta = E[X Xᵀ], d x d.
    pub delta: Mat,
    /// Eigenvalues of delta, descending.
    pub delta_eigs: Vec<f64>,
    pub m3: Option<f64>,
    pub m4: Option<f64>,
    pub near_degenerate: bool,
}

pub fn moments(dist: &LatentDistribution) -> MomentSet {
    let d = dist.dim();
    let mut delta = Mat::zeros(d, d);
    for k in 0..dist.num_blocks() {
        let w = dist.weights[k];
        let x = dist.atom(k);
        for i in 0..d {
            for j in 0..d {
                delta[(i, j)] += w * x[i] * x[j];
            }
        }
    }
    let delta_eigs = dense_symmetric_eigen(&delta)
        .expect("second-moment matrix is symmetric by construction")
        .values;
    let near_degenerate = delta_eigs.windows(2).any(|w| (w[0] - w[1]).abs() < 1e-8);
    let (m3, m4) = if d == 1 {
        let mut a = 0.0;
        let mut b = 0.0;
        for k in 0..dist.num_blocks() {
            let x = dist.atom(k)[0];
            a += dist.weights[k] * x.powi(3);
            b += dist.weights[k] * x.powi(4);
        }
        (Some(a), Some(b))
    } else {
        (None, None)
    };
    MomentSet {
        delta,
        delta_eigs,
        m3,
        m4,
        near_degenerate,
    }
}

/// Symmetric hollow adjacency matrix, upper triangle bit-packed row by row.
#[derive(Clone, PartialEq)]
pub struct Adjacency {
    n: usize,
    bits: Vec<u64>,
}

impl Adjacency {
    fn empty(n: usize) -> Adjacency {
        let nbits = n * (n - 1) / 2;
        Adjacency {
            n,
            bits: vec![0u64; nbits.div_ceil(64)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn pos(&self, i: usize, j: usize) -> usize {
        // Upper triangle, row-major: row i starts after i(2n - i - 1)/2 pairs.
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    #[inline]
    fn set(&mut self, pos: usize) {
        self.bits[pos / 64] |= 1u64 << (pos % 64);
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let p = self.pos(a, b);
        self.bits[p / 64] >> (p % 64) & 1 == 1
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        self.for_each_edge(|i, j| {
            deg[i] += 1;
            deg[j] += 1;
        });
        deg
    }

    /// Visits every edge exactly once in (i, j) order with i < j.
    pub fn for_each_edge(&self, mut f: impl FnMut(usize, usize)) {
        let n = self.n;
        let mut pos = 0usize;
        for i in 0..n.saturating_sub(1) {
            let len = n - 1 - i;
            let mut done = 0usize;
            while done < len {
                let take = (len - done).min(64);
                let mut word = load_bits(&self.bits, pos + done, take);
                while word != 0 {
                    let t = word.trailing_zeros() as usize;
                    f(i, i + 1 + done + t);
                    word &= word - 1;
                }
                done += take;
            }
            pos += len;
        }
    }
}

impl SymOp for Adjacency {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        y.fill(0.0);
        let n = self.n;
        let mut pos = 0usize;
        for i in 0..n.saturating_sub(1) {
            let len = n - 1 - i;
            let xi = x[i];
            let mut acc = 0.0f64;
            let mut done = 0usize;
            while done < len {
                let take = (len - done).min(64);
                let mut word = load_bits(&self.bits, pos + done, take);
                let base = i + 1 + done;
                while word != 0 {
                    let t = word.trailing_zeros() as usize;
                    let j = base + t;
                    acc += x[j];
                    y[j] += xi;
                    word &= word - 1;
                }
                done += take;
            }
            y[i] += acc;
            pos += len;
        }
    }
}

#[inline]
fn load_bits(bits: &[u64], start: usize, count: usize) -> u64 {
    let w = start / 64;
    let off = start % 64;
    let mut v = bits[w] >> off;
    if off != 0 && w + 1 < bits.len() {
        v |= bits[w + 1] << (64 - off);
    }
    if count < 64 {
        v &= (1u64 << count) - 1;
    }
    v
}

impl fmt::Debug for Adjacency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Adjacency")
            .field("n", &self.n)
            .field("edges", &self.edge_count())
            .finish()
    }
}

/// One sampled graph together with everything needed to reproduce and
/// diagnose it: the latent position of every vertex, the mixture component
/// it came from, and the seed that generated it.
#[derive(Clone, PartialEq)]
pub struct GraphSample {
    pub n: usize,
    /// n x d latent positions; row i is the atom of vertex i's block.
    pub latent: Mat,
    pub labels: Vec<usize>,
    pub adjacency: Adjacency,
    pub seed: u64,
}

impl fmt::Debug for GraphSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GraphSample")
            .field("n", &self.n)
            .field("d", &self.latent.cols())
            .field("edges", &self.adjacency.edge_count())
            .field("seed", &self.seed)
            .finish()
    }
}

/// Samples an n-vertex graph: labels i.i.d. from the mixture weights, then
/// one Bernoulli(⟨x_i, x_j⟩) coin per pair in row-major upper-triangle
/// order. The whole draw is a single deterministic function of `seed`.
pub fn sample_graph(dist: &LatentDistribution, n: usize, seed: u64) -> Result<GraphSample> {
    sample_graph_pinned(dist, n, seed, &[])
}

/// Like [`sample_graph`], but the listed `(vertex, block)` assignments are
/// forced instead of drawn. The label stream still consumes one draw per
/// vertex, so pinning changes nothing about which coins later pairs see.
pub fn sample_graph_pinned(
    dist: &LatentDistribution,
    n: usize,
    seed: u64,
    pinned: &[(usize, usize)],
) -> Result<GraphSample> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2 vertices, got {n}")));
    }
    let k = dist.num_blocks();
    for &(v, b) in pinned {
        if v >= n || b >= k {
            return Err(Error::Domain(format!(
                "pinned assignment ({v}, {b}) out of range"
            )));
        }
    }
    {
        let mut seen = vec![false; n];
        for &(v, _) in pinned {
            if seen[v] {
                return Err(Error::Domain(format!("vertex {v} pinned twice")));
            }
            seen[v] = true;
        }
    }

    let mut r = rng::stream(seed);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = r.random();
        let mut cum = 0.0;
        let mut lab = k - 1;
        for (idx, w) in dist.weights.iter().enumerate() {
            cum += w;
            if u < cum {
                lab = idx;
                break;
            }
        }
        labels.push(lab);
    }
    for &(v, b) in pinned {
        labels[v] = b;
    }

    let d = dist.dim();
    let mut latent = Mat::zeros(n, d);
    for i in 0..n {
        latent.row_mut(i).copy_from_slice(dist.atom(labels[i]));
    }

    let coins: Vec<Vec<Bernoulli>> = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| Bernoulli::new(dist.gram[(a, b)]).expect("gram entries are in [0,1]"))
                .collect()
        })
        .collect();
    let mut adjacency = Adjacency::empty(n);
    let mut pos = 0usize;
    for i in 0..n - 1 {
        let row = &coins[labels[i]];
        for j in (i + 1)..n {
            if row[labels[j]].sample(&mut r) {
                adjacency.set(pos);
            }
            pos += 1;
        }
    }
    Ok(GraphSample {
        n,
        latent,
        labels,
        adjacency,
        seed,
    })
}

impl GraphSample {
    pub fn dim(&self) -> usize {
        self.latent.cols()
    }

    /// Plain-text serialization: a `n d seed` header line, then one CSV row
    /// per vertex (`label,x_1,...,x_d`), then one `i j` line per edge with
    /// 0-based endpoints and i < j. LF line endings, full float precision.
    pub fn write_text<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{} {} {}", self.n, self.dim(), self.seed)?;
        for i in 0..self.n {
            let coords: Vec<String> = self.latent.row(i).iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{},{}", self.labels[i], coords.join(","))?;
        }
        let mut out = Ok(());
        self.adjacency.for_each_edge(|i, j| {
            if out.is_ok() {
                out = writeln!(w, "{i} {j}");
            }
        });
        out?;
        Ok(())
    }

    /// Inverse of [`write_text`]; returns an identical sample.
    pub fn read_text<R: BufRead>(r: &mut R) -> Result<GraphSample> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Domain("empty graph file".into()))??;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Domain(format!("bad graph header: {header:?}")));
        }
        let n: usize = parse(parts[0], "vertex count")?;
        let d: usize = parse(parts[1], "dimension")?;
        let seed: u64 = parse(parts[2], "seed")?;
        if n < 2 || d == 0 {
            return Err(Error::Domain("graph header out of range".into()));
        }
        let mut latent = Mat::zeros(n, d);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::Domain(format!("missing vertex row {i}")))??;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != d + 1 {
                return Err(Error::Domain(format!(
                    "vertex row {i} has {} fields",
                    fields.len()
                )));
            }
            labels.push(parse(fields[0], "label")?);
            for (j, f) in fields[1..].iter().enumerate() {
                latent[(i, j)] = parse(f, "coordinate")?;
            }
        }
        let mut adjacency = Adjacency::empty(n);
        for line in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let i: usize = parse(it.next().unwrap_or(""), "edge endpoint")?;
            let j: usize = parse(it.next().unwrap_or(""), "edge endpoint")?;
            if it.next().is_some() || i >= j || j >= n {
                return Err(Error::Domain(format!("bad edge line: {line:?}")));
            }
            let p = adjacency.pos(i, j);
            adjacency.set(p);
        }
        Ok(GraphSample {
            n,
            latent,
            labels,
            adjacency,
            seed,
        })
    }
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Domain(format!("cannot parse {what} from {s:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_block() -> (Mat, Vec<f64>) {
        let b = Mat::from_rows(&[vec![0.42, 0.42], vec![0.42, 0.5]]);
        (b, vec![0.6, 0.4])
    }

    #[test]
    fn two_block_factorization_reproduces_known_atoms() {
        let (b, pi) = two_block();
        let dist = sbm_to_latent(&b, &pi).unwrap();
        assert!(dist.gram().sub(&b).max_abs() < 1e-10);
        // The sign convention pins the factorization to these atoms.
        let want = [[0.63, -0.14], [0.69, 0.13]];
        for k in 0..2 {
            for j in 0..2 {
                assert!(
                    (dist.atom(k)[j] - want[k][j]).abs() < 5e-3,
                    "atom {k} coord {j}: {} vs {}",
                    dist.atom(k)[j],
                    want[k][j]
                );
            }
        }
    }

    #[test]
    fn indefinite_block_matrix_is_rejected() {
        let b = Mat::from_rows(&[vec![0.1, 0.9], vec![0.9, 0.1]]);
        assert!(matches!(
            sbm_to_latent(&b, &[0.5, 0.5]),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn singular_block_matrix_is_rejected() {
        let b = Mat::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]);
        assert!(matches!(
            sbm_to_latent(&b, &[0.5, 0.5]),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn erdos_renyi_atom_is_sqrt_p() {
        let dist = erdos_renyi_distribution(0.25).unwrap();
        assert_eq!(dist.dim(), 1);
        assert!((dist.atom(0)[0] - 0.5).abs() < 1e-15);
        assert!(erdos_renyi_distribution(0.0).is_err());
        assert!(erdos_renyi_distribution(1.0).is_err());
        assert!(erdos_renyi_distribution(-0.3).is_err());
    }

    #[test]
    fn mixture_validation_catches_bad_input() {
        // Weights off by more than 1e-12.
        let atoms = Mat::from_rows(&[vec![0.5], vec![0.6]]);
        assert!(LatentDistribution::new(atoms.clone(), vec![0.5, 0.49]).is_err());
        // Inner product above one.
        let big = Mat::from_rows(&[vec![2.0], vec![0.1]]);
        assert!(LatentDistribution::new(big, vec![0.5, 0.5]).is_err());
        // Duplicate atoms.
        let dup = Mat::from_rows(&[vec![0.5], vec![0.5]]);
        assert!(LatentDistribution::new(dup, vec![0.5, 0.5]).is_err());
        // Valid case passes.
        assert!(LatentDistribution::new(atoms, vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn moments_match_hand_computed_values() {
        let (b, pi) = two_block();
        let dist = sbm_to_latent(&b, &pi).unwrap();
        let m = moments(&dist);
        // trace(Delta) = sum_k pi_k B_kk because the atoms reproduce B.
        let want_trace = 0.6 * 0.42 + 0.4 * 0.5;
        assert!((m.delta.trace() - want_trace).abs() < 1e-12);
        assert!((m.delta_eigs[0] + m.delta_eigs[1] - want_trace).abs() < 1e-12);
        assert!(m.delta_eigs[0] > m.delta_eigs[1] && m.delta_eigs[1] > 0.0);
        assert!(!m.near_degenerate);
        assert!(m.m3.is_none() && m.m4.is_none());

        let er = erdos_renyi_distribution(0.25).unwrap();
        let em = moments(&er);
        assert!((em.delta[(0, 0)] - 0.25).abs() < 1e-15);
        assert!((em.m3.unwrap() - 0.25f64.powf(1.5)).abs() < 1e-15);
        assert!((em.m4.unwrap() - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_second_moment_converges_to_delta() {
        let (b, pi) = two_block();
        let dist = sbm_to_latent(&b, &pi).unwrap();
        let mut r = rng::stream(2024);
        let mut mc = Mat::zeros(2, 2);
        let draws = 1_000_000usize;
        for _ in 0..draws {
            let u: f64 = r.random();
            let k = if u < pi[0] { 0 } else { 1 };
            let x = dist.atom(k);
            for i in 0..2 {
                for j in 0..2 {
                    mc[(i, j)] += x[i] * x[j];
                }
            }
        }
        let mc = mc.scale(1.0 / draws as f64);
        let dev = mc.sub(&moments(&dist).delta).max_abs();
        assert!(dev < 5e-3, "Monte Carlo delta off by {dev}");
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let (b, pi) = two_block();
        let dist = sbm_to_latent(&b, &pi).unwrap();
        let a = sample_graph(&dist, 200, 7).unwrap();
        let b2 = sample_graph(&dist, 200, 7).unwrap();
        assert_eq!(a, b2);
        let c = sample_graph(&dist, 200, 8).unwrap();
        assert_ne!(a.adjacency, c.adjacency);
    }

    #[test]
    fn label_frequencies_match_weights() {
        let (b, pi) = two_block();
        let dist = sbm_to_latent(&b, &pi).unwrap();
        let g = sample_graph(&dist, 4000, 11).unwrap();
        let ones = g.labels.iter().filter(|&&l| l == 1).count() as f64;
        let frac = ones / 4000.0;
        let sigma = (0.4f64 * 0.6 / 4000.0).sqrt();
        assert!((frac - 0.4).abs() < 4.0 * sigma, "block-1 fraction {frac}");
    }

    #[test]
    fn edge_density_tracks_block_probabilities() {
        let (b, pi) = two_block();
        let dist = sbm_to_latent(&b, &pi).unwrap();
        for seed in [1u64, 2, 3] {
            let g = sample_graph(&dist, 2000, seed).unwrap();
            let mut pair_count = [[0f64; 2]; 2];
            let mut pair_edges = [[0f64; 2]; 2];
            for i in 0..g.n {
                for j in (i + 1)..g.n {
                    let (a, bb) = (g.labels[i].min(g.labels[j]), g.labels[i].max(g.labels[j]));
                    pair_count[a][bb] += 1.0;
                    if g.adjacency.get(i, j) {
                        pair_edges[a][bb] += 1.0;
                    }
                }
            }
            for a in 0..2 {
                for bb in a..2 {
                    let m = pair_count[a][bb];
                    let p = b[(a, bb)];
                    let density = pair_edges[a][bb] / m;
                    let tol = 4.0 * (p * (1.0 - p) / m).sqrt();
                    assert!(
                        (density - p).abs() < tol,
                        "seed {seed} blocks ({a},{bb}): density {density} vs {p}"
                    );
                }
            }
        }
    }

    #[test]
    fn pinned_labels_are_respected() {
        let (b, pi) = two_block();
        let dist = sbm_to_latent(&b, &pi).unwrap();
        let pins = [(0usize, 1usize), (5, 0), (199, 1)];
        let g = sample_graph_pinned(&dist, 200, 3, &pins).unwrap();
        for &(v, k) in &pins {
            assert_eq!(g.labels[v], k);
            assert_eq!(g.latent.row(v), dist.atom(k));
        }
        // Unpinned labels are untouched relative to the plain draw.
        let plain = sample_graph(&dist, 200, 3).unwrap();
        for v in 0..200 {
            if !pins.iter().any(|&(p, _)| p == v) {
                assert_eq!(g.labels[v], plain.labels[v]);
            }
        }
        assert!(sample_graph_pinned(&dist, 10, 0, &[(10, 0)]).is_err());
        assert!(sample_graph_pinned(&dist, 10, 0, &[(1, 2)]).is_err());
        assert!(sample_graph_pinned(&dist, 10, 0, &[(1, 0), (1, 1)]).is_err());
    }

    #[test]
    fn tiny_graphs_are_rejected() {
        let dist = erdos_renyi_distribution(0.5).unwrap();
        assert!(sample_graph(&dist, 1, 0).is_err());
        assert!(sample_graph(&dist, 2, 0).is_ok());
    }

    #[test]
    fn adjacency_get_is_symmetric_and_hollow() {
        let dist = erdos_renyi_distribution(0.5).unwrap();
        let g = sample_graph(&dist, 60, 5).unwrap();
        for i in 0..60 {
            assert!(!g.adjacency.get(i, i));
            for j in 0..60 {
                assert_eq!(g.adjacency.get(i, j), g.adjacency.get(j, i));
            }
        }
        let mut seen = 0usize;
        g.adjacency.for_each_edge(|i, j| {
            assert!(i < j);
            assert!(g.adjacency.get(i, j));
            seen += 1;
        });
        assert_eq!(seen, g.adjacency.edge_count());
    }

    #[test]
    fn packed_matvec_agrees_with_dense() {
        let (b, pi) = two_block();
        let dist = sbm_to_latent(&b, &pi).unwrap();
        let g = sample_graph(&dist, 130, 17).unwrap();
        let dense = Mat::from_fn(
            130,
            130,
            |i, j| if g.adjacency.get(i, j) { 1.0 } else { 0.0 },
        );
        let mut r = rng::stream(99);
        let x: Vec<f64> = (0..130).map(|_| r.random::<f64>() - 0.5).collect();
        let mut fast = vec![0.0; 130];
        let mut slow = vec![0.0; 130];
        g.adjacency.apply(&x, &mut fast);
        dense.matvec(&x, &mut slow);
        for (a, b2) in fast.iter().zip(&slow) {
            assert!((a - b2).abs() < 1e-12);
        }
    }

    #[test]
    fn text_round_trip_is_lossless() {
        let (b, pi) = two_block();
        let dist = sbm_to_latent(&b, &pi).unwrap();
        let g = sample_graph(&dist, 50, 23).unwrap();
        let mut buf = Vec::new();
        g.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("50 2 23\n"));
        assert!(!text.contains('\r'));
        let back = GraphSample::read_text(&mut std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(g, back);
    }
}
