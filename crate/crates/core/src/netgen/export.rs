use std::io::Write;

use serde::{Deserialize, Serialize};

use super::DigitalNet;
use crate::badic::{Base, DigitPoint};
use crate::error::{Error, Result};

/// JSON form of a net: exact digits for every coordinate of every point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetExport {
    pub format_version: String,
    pub b: u32,
    pub m: u32,
    pub s: usize,
    pub d: usize,
    pub t: u32,
    pub construction: String,
    /// `points[n][j]` holds the digits of coordinate `j` of point `n`.
    pub points: Vec<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl NetExport {
    pub fn from_net(net: &DigitalNet, config: Option<serde_json::Value>) -> Self {
        Self {
            format_version: crate::FORMAT_VERSION.to_string(),
            b: net.base().get(),
            m: net.spec.m,
            s: net.spec.s,
            d: net.spec.d,
            t: net.spec.t,
            construction: net.construction.clone(),
            points: net
                .points()
                .map(|p| p.iter().map(|x| x.digits().to_vec()).collect())
                .collect(),
            config,
        }
    }

    /// Rebuilds the digit points; fails on digits outside `Z_b`.
    pub fn to_points(&self) -> Result<Vec<Vec<DigitPoint>>> {
        let base = Base::new(self.b)?;
        self.points
            .iter()
            .map(|p| p.iter().map(|x| DigitPoint::from_digits(base, x)).collect())
            .collect()
    }

    pub fn write_json(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self).map_err(Error::from)
    }
}

impl DigitalNet {
    /// One line per point, coordinates as shortest round-trip decimals, with
    /// header `x1,...,xs`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let header: Vec<String> = (1..=self.dimension()).map(|j| format!("x{j}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|x| format!("{}", x.value())).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}
