//! Sobol direction numbers in the Joe–Kuo text layout.
//!
//! One line per dimension `j >= 2`: `d s a m_1 ... m_s`, where `s` is the
//! degree of the primitive polynomial, `a` encodes its inner coefficients and
//! `m_i` are the initial direction integers. Dimension 1 is implicit (the van
//! der Corput identity matrix). A header line starting with `d` is skipped.

use std::path::Path;

use crate::error::{Error, Result};

const BUNDLED: &str = include_str!("../../data/new-joe-kuo-6.21.txt");

/// Environment variable naming an alternative direction-number file.
pub const DIRECTION_NUMBERS_ENV: &str = "HOQMC_DIRECTION_NUMBERS";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionEntry {
    pub dimension: usize,
    pub degree: u32,
    pub coefficients: u32,
    pub initial: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionNumbers {
    entries: Vec<DirectionEntry>,
}

impl DirectionNumbers {
    /// The table shipped with the crate (21 dimensions).
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled direction numbers are well formed")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The file named by `HOQMC_DIRECTION_NUMBERS` if set, else the bundled table.
    pub fn from_env_or_bundled() -> Result<Self> {
        match std::env::var_os(DIRECTION_NUMBERS_ENV) {
            Some(p) => Self::from_path(p),
            None => Ok(Self::bundled()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('d') {
                continue;
            }
            let err = |msg: &str| Error::DirectionNumbers {
                line: lineno + 1,
                msg: msg.to_string(),
            };
            let fields: Vec<u64> = line
                .split_whitespace()
                .map(|f| f.parse::<u64>().map_err(|_| err("non-integer field")))
                .collect::<Result<_>>()?;
            if fields.len() < 3 {
                return Err(err("expected at least `d s a`"));
            }
            let (dimension, degree, coefficients) = (fields[0] as usize, fields[1] as u32, fields[2] as u32);
            let initial = fields[3..].to_vec();
            if degree == 0 || initial.len() != degree as usize {
                return Err(err("number of m_i does not match the degree"));
            }
            if dimension != entries.len() + 2 {
                return Err(err("dimensions must be listed consecutively from 2"));
            }
            for (i, &mi) in initial.iter().enumerate() {
                if mi % 2 == 0 || mi >= 1 << (i + 1) {
                    return Err(err("m_i must be odd and below 2^i"));
                }
            }
            entries.push(DirectionEntry {
                dimension,
                degree,
                coefficients,
                initial,
            });
        }
        Ok(Self { entries })
    }

    /// Number of dimensions available, including the implicit first one.
    pub fn max_dimension(&self) -> usize {
        self.entries.len() + 1
    }

    /// Direction integers `m_1..m_count` for 0-based coordinate `coord`.
    fn direction_integers(&self, coord: usize, count: usize) -> Vec<u64> {
        if coord == 0 {
            return vec![1; count];
        }
        let e = &self.entries[coord - 1];
        let s = e.degree as usize;
        let mut m: Vec<u64> = e.initial.clone();
        for k in s..count {
            // m_k = 2 a_1 m_{k-1} ^ 4 a_2 m_{k-2} ^ ... ^ 2^s m_{k-s} ^ m_{k-s}
            let mut v = m[k - s] ^ (m[k - s] << s);
            for i in 1..s {
                if (e.coefficients >> (s - 1 - i)) & 1 == 1 {
                    v ^= m[k - i] << i;
                }
            }
            m.push(v);
        }
        m.truncate(count);
        m
    }

    /// The `m × m` generator matrix of coordinate `coord` (row-major).
    /// Entry `(r, c)` is bit `r + 1` after the binary point of `m_{c+1} / 2^{c+1}`.
    pub fn matrix(&self, coord: usize, m: usize) -> Result<Vec<u8>> {
        if coord >= self.max_dimension() {
            return Err(Error::UnsupportedConstruction(format!(
                "sobol supports at most {} dimensions, coordinate {} requested",
                self.max_dimension(),
                coord + 1
            )));
        }
        if m > 63 {
            return Err(Error::UnsupportedConstruction(format!("sobol with m = {m} > 63")));
        }
        let dirs = self.direction_integers(coord, m);
        let mut out = vec![0u8; m * m];
        for (c, &mc) in dirs.iter().enumerate() {
            // m_{c+1} has c + 1 bits; its top bit is row 0
            for r in 0..=c {
                out[r * m + c] = ((mc >> (c - r)) & 1) as u8;
            }
        }
        Ok(out)
    }
}
