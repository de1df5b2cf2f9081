//! Digital nets over `Z_b`: generator matrices, classical constructions,
//! exact `t`-values and elementary-interval verification.

mod export;
mod sobol;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::badic::{Base, DigitPoint, MAX_DIGITS};
use crate::error::{Error, Result};
use crate::gf::EchelonBasis;

pub use export::NetExport;
pub use sobol::{DirectionEntry, DirectionNumbers, DIRECTION_NUMBERS_ENV};

/// Work limit for the exhaustive `t`-value search (number of row subsets).
pub const T_VALUE_GUARD: u128 = 10_000_000;
/// Work limit for elementary-interval counting (points × interval shapes).
pub const VERIFY_GUARD: u128 = 100_000_000;

/// `s` generator matrices over `Z_b`, each `rows × cols`, stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct GeneratorMatrixSet {
    base: Base,
    rows: usize,
    cols: usize,
    matrices: Vec<Vec<u8>>,
    label: String,
}

impl GeneratorMatrixSet {
    /// Builds a set from nested `[matrix][row][col]` entries.
    pub fn new(base: Base, matrices: Vec<Vec<Vec<u8>>>) -> Result<Self> {
        let rows = matrices.first().map_or(0, |m| m.len());
        let cols = matrices
            .first()
            .and_then(|m| m.first())
            .map_or(0, |r| r.len());
        let flat = matrices
            .into_iter()
            .map(|m| {
                if m.len() != rows {
                    return Err(Error::LengthMismatch {
                        expected: rows,
                        actual: m.len(),
                    });
                }
                let mut out = Vec::with_capacity(rows * cols);
                for r in m {
                    if r.len() != cols {
                        return Err(Error::LengthMismatch {
                            expected: cols,
                            actual: r.len(),
                        });
                    }
                    out.extend(r);
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_flat(base, rows, cols, flat, "custom")
    }

    pub fn from_flat(
        base: Base,
        rows: usize,
        cols: usize,
        matrices: Vec<Vec<u8>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidConfig("a net needs at least one coordinate".into()));
        }
        if rows > MAX_DIGITS {
            return Err(Error::InvalidPrecision(rows));
        }
        if cols > 63 || base.pow(cols as u32).is_none() {
            return Err(Error::InvalidConfig(format!("b^m overflows for m = {cols}")));
        }
        for m in &matrices {
            if m.len() != rows * cols {
                return Err(Error::LengthMismatch {
                    expected: rows * cols,
                    actual: m.len(),
                });
            }
            if let Some(&bad) = m.iter().find(|&&x| x as u32 >= base.get()) {
                return Err(Error::InvalidDigit {
                    digit: bad as u32,
                    base: base.get(),
                });
            }
        }
        Ok(Self {
            base,
            rows,
            cols,
            matrices,
            label: label.into(),
        })
    }

    /// `s` identity-free zero matrices; every point is the origin.
    pub fn zeros(base: Base, s: usize, m: usize) -> Result<Self> {
        Self::from_flat(base, m, m, vec![vec![0; m * m]; s], "zero")
    }

    pub fn base(&self) -> Base {
        self.base
    }

    /// Number of coordinates `s`.
    pub fn dimension(&self) -> usize {
        self.matrices.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns, i.e. `m`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn entry(&self, coord: usize, r: usize, c: usize) -> u8 {
        self.matrices[coord][r * self.cols + c]
    }

    /// Row `r` of matrix `coord`; all zero beyond the stored rows.
    pub fn row(&self, coord: usize, r: usize) -> Vec<u8> {
        if r < self.rows {
            self.matrices[coord][r * self.cols..(r + 1) * self.cols].to_vec()
        } else {
            vec![0; self.cols]
        }
    }

    pub fn num_points(&self) -> u64 {
        self.base.pow(self.cols as u32).expect("checked at construction")
    }

    /// Coordinate digits `C_i n⃗` for point `n`, at precision `max(rows, 1)`.
    pub fn generate_point(&self, n: u64) -> Result<Vec<DigitPoint>> {
        let limit = self.num_points();
        if n >= limit {
            return Err(Error::OutOfRange {
                what: "point index",
                index: n,
                limit,
            });
        }
        let b = self.base.get();
        let mut ndigits = [0u32; 64];
        let mut rest = n;
        for slot in ndigits.iter_mut().take(self.cols) {
            *slot = (rest % b as u64) as u32;
            rest /= b as u64;
        }
        let nd = &ndigits[..self.cols];
        self.matrices
            .iter()
            .map(|mat| {
                let mut p = DigitPoint::zero(self.base, self.rows.max(1))?;
                for r in 0..self.rows {
                    let row = &mat[r * self.cols..(r + 1) * self.cols];
                    let y = row
                        .iter()
                        .zip(nd)
                        .fold(0u32, |acc, (&c, &x)| (acc + c as u32 * x) % b);
                    p.set_digit(r, y as u8);
                }
                Ok(p)
            })
            .collect()
    }

    /// Keeps only the first `w` rows.
    pub fn truncate_rows(&self, w: usize) -> GeneratorMatrixSet {
        if w >= self.rows {
            return self.clone();
        }
        let matrices = self
            .matrices
            .iter()
            .map(|m| m[..w * self.cols].to_vec())
            .collect();
        Self {
            base: self.base,
            rows: w,
            cols: self.cols,
            matrices,
            label: self.label.clone(),
        }
    }
}

impl fmt::Debug for GeneratorMatrixSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "GeneratorMatrixSet({}, b={}, s={}, {}x{})",
            self.label,
            self.base,
            self.dimension(),
            self.rows,
            self.cols
        )?;
        for (i, _) in self.matrices.iter().enumerate() {
            writeln!(f, "C_{}:", i + 1)?;
            for r in 0..self.rows {
                writeln!(f, "  {:?}", self.row(i, r))?;
            }
        }
        Ok(())
    }
}

/// Classical constructions shipped with the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    VanDerCorput,
    Sobol,
    Faure,
}

impl Construction {
    pub fn name(self) -> &'static str {
        match self {
            Construction::VanDerCorput => "van_der_corput",
            Construction::Sobol => "sobol",
            Construction::Faure => "faure",
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Construction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "van_der_corput" | "vdc" => Ok(Construction::VanDerCorput),
            "sobol" => Ok(Construction::Sobol),
            "faure" => Ok(Construction::Faure),
            other => Err(Error::UnsupportedConstruction(other.to_string())),
        }
    }
}

/// Generator matrices of a named construction, using the bundled Sobol table.
pub fn builtin_matrices(c: Construction, base: Base, s: usize, m: usize) -> Result<GeneratorMatrixSet> {
    builtin_matrices_with(c, base, s, m, &DirectionNumbers::bundled())
}

pub fn builtin_matrices_with(
    c: Construction,
    base: Base,
    s: usize,
    m: usize,
    directions: &DirectionNumbers,
) -> Result<GeneratorMatrixSet> {
    if s == 0 {
        return Err(Error::UnsupportedConstruction(format!("{c} with s = 0")));
    }
    let matrices = match c {
        Construction::VanDerCorput => {
            if s != 1 {
                return Err(Error::UnsupportedConstruction(format!(
                    "van_der_corput is one-dimensional, s = {s} requested"
                )));
            }
            vec![identity(m)]
        }
        Construction::Sobol => {
            if base.get() != 2 {
                return Err(Error::UnsupportedConstruction(format!(
                    "sobol requires base 2, got {base}"
                )));
            }
            (0..s)
                .map(|i| directions.matrix(i, m))
                .collect::<Result<Vec<_>>>()?
        }
        Construction::Faure => {
            if (base.get() as usize) < s {
                return Err(Error::UnsupportedConstruction(format!(
                    "faure requires b >= s, got b = {base}, s = {s}"
                )));
            }
            (0..s).map(|i| pascal_power(base, i as u32, m)).collect()
        }
    };
    GeneratorMatrixSet::from_flat(base, m, m, matrices, c.name())
}

fn identity(m: usize) -> Vec<u8> {
    let mut out = vec![0; m * m];
    for i in 0..m {
        out[i * m + i] = 1;
    }
    out
}

/// `P^e` with `P` the upper-triangular Pascal matrix mod `b`:
/// entry `(r, c) = C(c, r) e^{c - r} mod b` for `r <= c`.
fn pascal_power(base: Base, e: u32, m: usize) -> Vec<u8> {
    let b = base.get() as u64;
    let mut binom = vec![vec![0u64; m]; m];
    for c in 0..m {
        binom[c][0] = 1;
        for r in 1..=c {
            binom[c][r] = (binom[c - 1][r - 1] + if r < c { binom[c - 1][r] } else { 0 }) % b;
        }
    }
    let mut out = vec![0u8; m * m];
    for c in 0..m {
        for r in 0..=c {
            let pow = (0..c - r).fold(1u64, |acc, _| acc * e as u64 % b);
            out[r * m + c] = (binom[c][r] * pow % b) as u8;
        }
    }
    out
}

/// Parameters tying a net, its interlacing factor and its quality together.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub base: Base,
    pub m: u32,
    /// Dimension after interlacing.
    pub s: usize,
    pub d: usize,
    pub t: u32,
}

impl NetSpec {
    /// A spec with the trivially valid quality parameter `t = m`.
    pub fn new(base: Base, m: u32, s: usize, d: usize) -> Result<Self> {
        if s == 0 || d == 0 {
            return Err(Error::InvalidConfig("s and d must be positive".into()));
        }
        Ok(Self { base, m, s, d, t: m })
    }

    pub fn with_t(mut self, t: u32) -> Result<Self> {
        if t > self.m {
            return Err(Error::InvalidConfig(format!("t = {t} exceeds m = {}", self.m)));
        }
        self.t = t;
        Ok(self)
    }

    pub fn num_points(&self) -> u64 {
        self.base.pow(self.m).unwrap_or(u64::MAX)
    }
}

/// `b^m` points, each a vector of digit points.
#[derive(Clone, Debug, PartialEq)]
pub struct DigitalNet {
    pub spec: NetSpec,
    pub construction: String,
    dim: usize,
    coords: Vec<DigitPoint>,
}

impl DigitalNet {
    pub fn from_points(spec: NetSpec, construction: impl Into<String>, points: Vec<Vec<DigitPoint>>) -> Result<Self> {
        let n = spec.num_points();
        if points.len() as u64 != n {
            return Err(Error::LengthMismatch {
                expected: n as usize,
                actual: points.len(),
            });
        }
        let dim = points.first().map_or(0, |p| p.len());
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    actual: p.len(),
                });
            }
            coords.extend(p);
        }
        Ok(Self {
            spec,
            construction: construction.into(),
            dim,
            coords,
        })
    }

    pub(crate) fn from_flat(spec: NetSpec, construction: String, dim: usize, coords: Vec<DigitPoint>) -> Self {
        debug_assert_eq!(coords.len() as u64, spec.num_points() * dim as u64);
        Self {
            spec,
            construction,
            dim,
            coords,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn base(&self) -> Base {
        self.spec.base
    }

    pub fn point(&self, n: usize) -> &[DigitPoint] {
        &self.coords[n * self.dim..(n + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[DigitPoint]> {
        self.coords.chunks(self.dim)
    }

    /// Float coordinates of every point.
    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.points().map(|p| p.iter().map(DigitPoint::value).collect()).collect()
    }

    /// Every coordinate padded (or truncated) to precision `w`.
    pub fn with_precision(&self, w: usize) -> Result<DigitalNet> {
        let coords = self
            .coords
            .iter()
            .map(|x| x.with_precision(w))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            coords,
            ..self.clone()
        })
    }

    /// Maps every point through `D_d`, turning a `ds`-dimensional net into an
    /// `s`-dimensional one.
    pub fn interlace(&self, d: usize) -> Result<DigitalNet> {
        if d == 0 || !self.dim.is_multiple_of(d) {
            return Err(Error::InvalidConfig(format!(
                "{} coordinates cannot be grouped by interlacing factor {d}",
                self.dim
            )));
        }
        let coords = self
            .points()
            .map(|p| crate::interlace::interlace_coordinates(p, d))
            .collect::<Result<Vec<_>>>()?
            .concat();
        Ok(Self {
            spec: NetSpec { s: self.dim / d, d, ..self.spec },
            construction: self.construction.clone(),
            dim: self.dim / d,
            coords,
        })
    }
}

/// Enumerates `n = 0..b^m` through [`GeneratorMatrixSet::generate_point`].
///
/// `g` must have `m` columns and either `s` (already interlaced) or `d·s`
/// coordinates.
pub fn generate_net(g: &GeneratorMatrixSet, spec: NetSpec) -> Result<DigitalNet> {
    if g.cols() != spec.m as usize {
        return Err(Error::InvalidConfig(format!(
            "generator matrices have {} columns but m = {}",
            g.cols(),
            spec.m
        )));
    }
    if g.base() != spec.base {
        return Err(Error::BaseMismatch(g.base().get(), spec.base.get()));
    }
    let dim = g.dimension();
    if dim != spec.s && dim != spec.s * spec.d {
        return Err(Error::InvalidConfig(format!(
            "{dim} generator matrices do not match s = {} or d·s = {}",
            spec.s,
            spec.s * spec.d
        )));
    }
    let n = g.num_points();
    let mut coords = Vec::with_capacity(n as usize * dim);
    for i in 0..n {
        coords.extend(g.generate_point(i)?);
    }
    Ok(DigitalNet::from_flat(spec, g.label().to_string(), dim, coords))
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Number of ways to write `total` as an ordered sum of `parts` nonnegative integers.
fn compositions(total: usize, parts: usize) -> u128 {
    if parts == 0 {
        return (total == 0) as u128;
    }
    binomial((total + parts - 1) as u128, (parts - 1) as u128)
}

/// Calls `f` on every composition of `total` into `parts` nonnegative parts,
/// stopping early when `f` returns `false`.
fn for_each_composition(total: usize, parts: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    fn rec(buf: &mut Vec<usize>, total: usize, parts: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
        if parts == 1 {
            buf.push(total);
            let ok = f(buf);
            buf.pop();
            return ok;
        }
        for first in 0..=total {
            buf.push(first);
            let ok = rec(buf, total - first, parts - 1, f);
            buf.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    if parts == 0 {
        return total != 0 || f(&[]);
    }
    rec(&mut Vec::with_capacity(parts), total, parts, f)
}

/// Whether, for every `(d_1, ..., d_s)` with `Σ d_i = k`, the first `d_i` rows
/// of every `C_i` are jointly linearly independent over `Z_b`.
fn rows_independent(g: &GeneratorMatrixSet, k: usize) -> bool {
    fn rec(g: &GeneratorMatrixSet, coord: usize, remaining: usize, basis: &EchelonBasis) -> bool {
        let last = coord + 1 == g.dimension();
        let mut acc = basis.clone();
        if last {
            return (0..remaining).all(|r| acc.insert(&g.row(coord, r)));
        }
        for di in 0..=remaining {
            if di > 0 && !acc.insert(&g.row(coord, di - 1)) {
                // any larger d_i contains this dependent set as well
                return false;
            }
            if !rec(g, coord + 1, remaining - di, &acc) {
                return false;
            }
        }
        true
    }
    rec(g, 0, k, &EchelonBasis::new(g.base().get(), g.cols()))
}

/// Smallest `t` such that every row selection with `Σ d_i = m - t` is
/// linearly independent; this equals the `t` of the net definition.
pub fn t_value(g: &GeneratorMatrixSet) -> Result<u32> {
    let m = g.cols();
    let s = g.dimension();
    let work: u128 = (0..=m).map(|k| compositions(k, s)).fold(0u128, |a, x| a.saturating_add(x));
    if work > T_VALUE_GUARD {
        return Err(Error::TooLarge {
            what: "t-value search",
            work,
            limit: T_VALUE_GUARD,
        });
    }
    for t in 0..=m {
        if rows_independent(g, m - t) {
            return Ok(t as u32);
        }
    }
    unreachable!("k = 0 is always independent")
}

/// An elementary interval `Π_i [a_i b^{-d_i}, (a_i + 1) b^{-d_i})` and the
/// number of points found in it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ElementaryInterval {
    pub levels: Vec<usize>,
    pub anchors: Vec<u64>,
    pub count: u64,
    pub expected: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NetCheck {
    pub passed: bool,
    pub violation: Option<ElementaryInterval>,
}

/// Counts points in every elementary interval of volume `b^{t-m}` using exact
/// digit prefixes; passes iff each holds exactly `b^t` points.
pub fn verify_net(net: &DigitalNet, t: u32) -> Result<NetCheck> {
    let m = net.spec.m as usize;
    let t = t as usize;
    if t > m {
        return Err(Error::InvalidConfig(format!("t = {t} exceeds m = {m}")));
    }
    let s = net.dimension();
    let base = net.base();
    let b = base.get() as u64;
    let k = m - t;
    let shapes = compositions(k, s);
    let work = shapes.saturating_mul(net.len() as u128);
    if work > VERIFY_GUARD {
        return Err(Error::TooLarge {
            what: "elementary interval count",
            work,
            limit: VERIFY_GUARD,
        });
    }
    let expected = b.pow(t as u32);
    let cells = b.pow(k as u32) as usize;
    let mut counts = vec![0u64; cells];
    let mut violation = None;
    for_each_composition(k, s, &mut |levels: &[usize]| {
        counts.iter_mut().for_each(|c| *c = 0);
        for p in net.points() {
            let idx = levels
                .iter()
                .zip(p)
                .fold(0u64, |acc, (&lvl, x)| acc * b.pow(lvl as u32) + x.prefix_index(lvl));
            counts[idx as usize] += 1;
        }
        if let Some(cell) = counts.iter().position(|&c| c != expected) {
            // unpack the mixed-radix cell index into per-coordinate anchors
            let mut rest = cell as u64;
            let mut anchors = vec![0u64; s];
            for i in (0..s).rev() {
                let radix = b.pow(levels[i] as u32);
                anchors[i] = rest % radix;
                rest /= radix;
            }
            violation = Some(ElementaryInterval {
                levels: levels.to_vec(),
                anchors,
                count: counts[cell],
                expected,
            });
            return false;
        }
        true
    });
    Ok(NetCheck {
        passed: violation.is_none(),
        violation,
    })
}

/// Row-interleaves each group of `d` matrices into one `dR × m` matrix, so
/// that generating with the result equals interlacing generated points.
/// Rows beyond [`MAX_DIGITS`] are dropped with a warning.
pub fn interlace_matrices(g: &GeneratorMatrixSet, d: usize) -> Result<GeneratorMatrixSet> {
    if d == 0 || !g.dimension().is_multiple_of(d) {
        return Err(Error::InvalidConfig(format!(
            "{} matrices cannot be grouped by interlacing factor {d}",
            g.dimension()
        )));
    }
    if d == 1 {
        return Ok(g.clone());
    }
    let full_rows = d * g.rows();
    let rows = full_rows.min(MAX_DIGITS);
    if rows < full_rows {
        log::warn!("interlaced matrices truncated from {full_rows} to {rows} rows");
    }
    let cols = g.cols();
    let matrices = (0..g.dimension() / d)
        .map(|i| {
            let mut out = Vec::with_capacity(rows * cols);
            for row in 0..rows {
                // output row `row` is row `row / d` of matrix `i d + row % d`
                out.extend(g.row(i * d + row % d, row / d));
            }
            out
        })
        .collect();
    GeneratorMatrixSet::from_flat(
        g.base(),
        rows,
        cols,
        matrices,
        format!("{}-interlaced-{d}", g.label()),
    )
}
