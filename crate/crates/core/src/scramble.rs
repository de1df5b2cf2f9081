//! Owen's nested uniform scrambling, the order-`d` scramble, and the linear
//! matrix scramble with digital shift.
//!
//! All randomness is derived from a [`ScrambleKey`] by hashing, so a key
//! always reproduces the same permutations regardless of call order or
//! thread count.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::badic::{Base, DigitPoint};
use crate::error::{Error, Result};
use crate::interlace::{deinterlace_point, interlace_point};
use crate::netgen::DigitalNet;
use crate::rng::{absorb, bounded, hash_words, keyed_rng, mix64};

const OWEN_TAG: u64 = 0x4f57_454e;
const LINEAR_TAG: u64 = 0x4c49_4e45;
const PERM_SALT: u64 = 0xd1b5_4a32_d192_ed03;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScrambleKind {
    None,
    #[default]
    Owen,
    Linear,
}

impl ScrambleKind {
    pub fn name(self) -> &'static str {
        match self {
            ScrambleKind::None => "none",
            ScrambleKind::Owen => "owen",
            ScrambleKind::Linear => "linear",
        }
    }
}

impl fmt::Display for ScrambleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScrambleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ScrambleKind::None),
            "owen" => Ok(ScrambleKind::Owen),
            "linear" => Ok(ScrambleKind::Linear),
            other => Err(Error::InvalidConfig(format!(
                "unknown scramble kind '{other}' (expected owen, linear or none)"
            ))),
        }
    }
}

/// Identifies one realization of the random permutation family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScrambleKey {
    pub seed: u64,
    pub replication_id: u64,
    pub base: Base,
    /// Number of digits scrambled per coordinate.
    pub depth: usize,
}

impl ScrambleKey {
    pub fn new(seed: u64, replication_id: u64, base: Base, depth: usize) -> Self {
        Self {
            seed,
            replication_id,
            base,
            depth,
        }
    }

    fn words(&self, tag: u64) -> [u64; 4] {
        [tag, self.seed, self.replication_id, self.base.get() as u64]
    }
}

/// A family of permutations of `Z_b` indexed by coordinate and digit prefix.
///
/// A node stands for a `(coord, prefix)` pair; [`child`](Self::child) extends
/// the prefix by one digit.
pub trait PermutationSource: Sync {
    type Node: Copy;

    fn base(&self) -> Base;
    fn root(&self, coord: usize) -> Self::Node;
    fn child(&self, node: Self::Node, digit: u8) -> Self::Node;
    /// Image of `digit` under the permutation attached to `node`.
    fn apply(&self, node: Self::Node, digit: u8) -> u8;

    /// The permutation `π_{coord, prefix}` as an image table.
    fn lookup(&self, coord: usize, prefix: &[u8]) -> Vec<u8> {
        let node = prefix.iter().fold(self.root(coord), |n, &x| self.child(n, x));
        (0..self.base().get() as u8).map(|x| self.apply(node, x)).collect()
    }
}

/// Permutations drawn lazily from a keyed hash of `(key, coord, prefix)`.
#[derive(Clone, Copy, Debug)]
pub struct HashedPermutations {
    base: Base,
    state: u64,
}

impl HashedPermutations {
    pub fn new(key: &ScrambleKey) -> Self {
        Self {
            base: key.base,
            state: hash_words(&key.words(OWEN_TAG)),
        }
    }
}

impl PermutationSource for HashedPermutations {
    type Node = u64;

    fn base(&self) -> Base {
        self.base
    }

    #[inline]
    fn root(&self, coord: usize) -> u64 {
        absorb(self.state, coord as u64)
    }

    #[inline]
    fn child(&self, node: u64, digit: u8) -> u64 {
        mix64(node.wrapping_add((digit as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
    }

    #[inline]
    fn apply(&self, node: u64, digit: u8) -> u8 {
        let b = self.base.get() as u64;
        let mut r = mix64(node ^ PERM_SALT);
        if b == 2 {
            return digit ^ (r & 1) as u8;
        }
        // Fisher-Yates on 0..b, one fresh word per swap
        let mut perm = [0u8; 256];
        for (i, p) in perm.iter_mut().take(b as usize).enumerate() {
            *p = i as u8;
        }
        for i in (1..b).rev() {
            r = mix64(r.wrapping_add(PERM_SALT));
            let j = bounded(r, i + 1);
            perm.swap(i as usize, j as usize);
        }
        perm[digit as usize]
    }
}

/// Every permutation is the identity; scrambling is a no-op.
#[derive(Clone, Copy, Debug)]
pub struct IdentityPermutations {
    pub base: Base,
}

impl PermutationSource for IdentityPermutations {
    type Node = ();

    fn base(&self) -> Base {
        self.base
    }
    fn root(&self, _coord: usize) {}
    fn child(&self, _node: (), _digit: u8) {}
    fn apply(&self, _node: (), digit: u8) -> u8 {
        digit
    }
}

/// Every permutation of a full tree up to a fixed depth, stored explicitly.
/// Beyond the stored depth permutations are the identity.
#[derive(Clone, Debug)]
pub struct PermutationTree {
    base: Base,
    depth: usize,
    perms: HashMap<(usize, Vec<u8>), Vec<u8>>,
}

/// Node of a [`PermutationTree`]: coordinate, prefix length and packed prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TreeNode {
    coord: usize,
    len: usize,
    prefix: [u8; 16],
}

impl PermutationTree {
    /// Uniform random permutations for coordinates `0..coords` and every
    /// prefix of length `< depth`.
    pub fn random(base: Base, coords: usize, depth: usize, seed: u64) -> Result<Self> {
        let nodes = (0..depth as u32).map(|l| base.pow(l).unwrap_or(u64::MAX)).sum::<u64>() as u128 * coords as u128;
        if depth > 16 || nodes > 1 << 20 {
            return Err(Error::TooLarge {
                what: "explicit permutation tree",
                work: nodes,
                limit: 1 << 20,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = base.get() as usize;
        let mut perms = HashMap::new();
        for coord in 0..coords {
            for len in 0..depth {
                for idx in 0..base.pow(len as u32).expect("checked") {
                    let prefix = DigitPoint::from_integer(idx, base, len.max(1))?;
                    let prefix = prefix.digits()[..len].to_vec();
                    let mut p: Vec<u8> = (0..b as u8).collect();
                    for i in (1..b).rev() {
                        p.swap(i, rng.random_range(0..=i));
                    }
                    perms.insert((coord, prefix), p);
                }
            }
        }
        Ok(Self { base, depth, perms })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// The stored permutation for `(coord, prefix)`, if any.
    pub fn get(&self, coord: usize, prefix: &[u8]) -> Option<&[u8]> {
        self.perms.get(&(coord, prefix.to_vec())).map(Vec::as_slice)
    }
}

impl PermutationSource for PermutationTree {
    type Node = TreeNode;

    fn base(&self) -> Base {
        self.base
    }

    fn root(&self, coord: usize) -> TreeNode {
        TreeNode {
            coord,
            len: 0,
            prefix: [0; 16],
        }
    }

    fn child(&self, mut node: TreeNode, digit: u8) -> TreeNode {
        if node.len < node.prefix.len() {
            node.prefix[node.len] = digit;
        }
        node.len += 1;
        node
    }

    fn apply(&self, node: TreeNode, digit: u8) -> u8 {
        if node.len >= self.depth {
            return digit;
        }
        self.get(node.coord, &node.prefix[..node.len])
            .map_or(digit, |p| p[digit as usize])
    }
}

/// Nested scrambling of all `W` digits of `x`: digit `k` becomes
/// `π_{coord, x_1..x_{k-1}}(x_k)`. Zero digits past the point's finite
/// expansion are permuted too, so the output tail is random.
pub fn owen_scramble<S: PermutationSource + ?Sized>(x: &DigitPoint, coord: usize, src: &S) -> DigitPoint {
    debug_assert_eq!(x.base(), src.base());
    let mut out = *x;
    let mut node = src.root(coord);
    for k in 0..x.precision() {
        let xk = x.digit(k);
        out.set_digit(k, src.apply(node, xk));
        node = src.child(node, xk);
    }
    out
}

/// Scrambles coordinate `j` of every point with permutation family `Π_j`,
/// shared across points. Apply before interlacing.
pub fn scramble_net<S: PermutationSource + ?Sized>(net: &DigitalNet, src: &S) -> Result<DigitalNet> {
    if net.base() != src.base() {
        return Err(Error::BaseMismatch(net.base().get(), src.base().get()));
    }
    let points = net
        .points()
        .map(|p| p.iter().enumerate().map(|(j, x)| owen_scramble(x, j, src)).collect())
        .collect();
    DigitalNet::from_points(net.spec, net.construction.clone(), points)
}

/// `D_d(owen(D_d^{-1}(y)))`: scrambles an already interlaced point. Output
/// coordinate `i` uses permutation families `i d, ..., i d + d - 1`.
pub fn order_d_scramble<S: PermutationSource + ?Sized>(y: &[DigitPoint], d: usize, src: &S) -> Result<Vec<DigitPoint>> {
    y.iter()
        .enumerate()
        .map(|(i, yi)| {
            let parts = deinterlace_point(yi, d)?;
            let scrambled: Vec<DigitPoint> = parts
                .iter()
                .enumerate()
                .map(|(r, x)| owen_scramble(x, i * d + r, src))
                .collect();
            interlace_point(&scrambled)
        })
        .collect()
}

/// `y = L x + e` over `Z_b`, with `L` lower triangular with nonzero diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearScramble {
    base: Base,
    depth: usize,
    /// Column-major: `lower[c]` holds rows `c..depth` of column `c`.
    lower: Vec<Vec<u8>>,
    shift: Vec<u8>,
}

impl LinearScramble {
    /// Draws `L` and `e` for coordinate `coord` from `key`.
    pub fn new(key: &ScrambleKey, coord: usize) -> Self {
        let w = key.depth;
        let b = key.base.get();
        let mut words = key.words(LINEAR_TAG).to_vec();
        words.push(coord as u64);
        let mut rng = keyed_rng(&words);
        let lower = (0..w)
            .map(|c| {
                (c..w)
                    .map(|r| {
                        if r == c {
                            rng.random_range(1..b) as u8
                        } else {
                            rng.random_range(0..b) as u8
                        }
                    })
                    .collect()
            })
            .collect();
        let shift = (0..w).map(|_| rng.random_range(0..b) as u8).collect();
        Self {
            base: key.base,
            depth: w,
            lower,
            shift,
        }
    }

    /// `L = I`, `e = 0`.
    pub fn identity(base: Base, depth: usize) -> Self {
        Self {
            base,
            depth,
            lower: (0..depth)
                .map(|c| {
                    let mut col = vec![0; depth - c];
                    col[0] = 1;
                    col
                })
                .collect(),
            shift: vec![0; depth],
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Entry `(r, c)` of `L`.
    pub fn entry(&self, r: usize, c: usize) -> u8 {
        if r < c {
            0
        } else {
            self.lower[c][r - c]
        }
    }

    pub fn shift(&self) -> &[u8] {
        &self.shift
    }

    /// Applies the scramble; the output has precision `depth`, reading digits
    /// of `x` beyond its precision as zero.
    pub fn apply(&self, x: &DigitPoint) -> Result<DigitPoint> {
        if x.base() != self.base {
            return Err(Error::BaseMismatch(x.base().get(), self.base.get()));
        }
        let b = self.base.get() as u16;
        let mut acc: Vec<u16> = self.shift.iter().map(|&e| e as u16).collect();
        for c in 0..self.depth.min(x.precision()) {
            let xc = x.digit(c) as u16;
            if xc == 0 {
                continue;
            }
            for (a, &l) in acc[c..].iter_mut().zip(&self.lower[c]) {
                *a = (*a + xc * l as u16) % b;
            }
        }
        let digits: Vec<u8> = acc.into_iter().map(|a| a as u8).collect();
        DigitPoint::from_digits(self.base, &digits)
    }
}

/// Linear scramble of a single coordinate at the precision of `x`.
pub fn linear_scramble(x: &DigitPoint, coord: usize, key: &ScrambleKey) -> Result<DigitPoint> {
    let key = ScrambleKey {
        depth: x.precision(),
        ..*key
    };
    LinearScramble::new(&key, coord).apply(x)
}

/// Linear scramble of every coordinate of a pre-interlacing net, one
/// `(L_j, e_j)` per coordinate shared across points.
pub fn linear_scramble_net(net: &DigitalNet, key: &ScrambleKey) -> Result<DigitalNet> {
    if net.base() != key.base {
        return Err(Error::BaseMismatch(net.base().get(), key.base.get()));
    }
    let scrambles: Vec<LinearScramble> = (0..net.dimension()).map(|j| LinearScramble::new(key, j)).collect();
    let points = net
        .points()
        .map(|p| p.iter().zip(&scrambles).map(|(x, ls)| ls.apply(x)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let spec = net.spec;
    DigitalNet::from_points(spec, net.construction.clone(), points)
}
