//! Plain-text file formats. Floats are written with 17 significant digits,
//! which round-trips every `f64` exactly.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, ensure, Context};
use heterocyl_core::diagnostics::HamiltonianTrace;
use heterocyl_core::euler::Samples;
use heterocyl_core::{CrossSectionProfile, CylinderField, EulerFlow, ThetaField};

pub const CHECKPOINT_HEADER: &str = "heterocyl-field v1";

pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn write(path: &Path, text: String) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn profile_csv(p: &CrossSectionProfile) -> String {
    let mut s = String::from("x,phi\n");
    for (i, v) in p.values().iter().enumerate() {
        writeln!(s, "{},{}", fmt17(p.x(i)), fmt17(*v)).unwrap();
    }
    s
}

pub fn write_profile(path: &Path, p: &CrossSectionProfile) -> anyhow::Result<()> {
    write(path, profile_csv(p))
}

pub fn write_trace(path: &Path, t: &HamiltonianTrace) -> anyhow::Result<()> {
    let mut s = String::from("t,H\n");
    for (z, h) in t.heights.iter().zip(&t.values) {
        writeln!(s, "{},{}", fmt17(*z), fmt17(*h)).unwrap();
    }
    write(path, s)
}

/// A saved strip solution together with its `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub field: CylinderField,
    pub lambda: f64,
}

impl Checkpoint {
    /// Header line, then `nx`, `nz`, `L`, `shift`, `lambda` as `key,value`
    /// lines, then one comma-separated line per slice from `z = −L` up.
    pub fn to_text(&self) -> String {
        let f = &self.field;
        let mut s = String::with_capacity(24 * f.values().len() + 128);
        writeln!(s, "{CHECKPOINT_HEADER}").unwrap();
        writeln!(s, "nx,{}", f.nx()).unwrap();
        writeln!(s, "nz,{}", f.nz()).unwrap();
        writeln!(s, "L,{}", fmt17(f.half_length())).unwrap();
        writeln!(s, "shift,{}", fmt17(f.shift)).unwrap();
        writeln!(s, "lambda,{}", fmt17(self.lambda)).unwrap();
        for j in 0..=f.nz() {
            let row: Vec<String> = f.row(j).iter().map(|v| fmt17(*v)).collect();
            writeln!(s, "{}", row.join(",")).unwrap();
        }
        s
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let mut lines = text.lines();
        ensure!(lines.next() == Some(CHECKPOINT_HEADER), "missing `{CHECKPOINT_HEADER}` header");
        let mut field = |key: &str| -> anyhow::Result<String> {
            let line = lines.next().with_context(|| format!("missing `{key}` line"))?;
            match line.split_once(',') {
                Some((k, v)) if k == key => Ok(v.to_string()),
                _ => bail!("expected `{key},<value>`, found `{line}`"),
            }
        };
        let nx: usize = field("nx")?.parse().context("nx")?;
        let nz: usize = field("nz")?.parse().context("nz")?;
        let l: f64 = field("L")?.parse().context("L")?;
        let shift: f64 = field("shift")?.parse().context("shift")?;
        let lambda: f64 = field("lambda")?.parse().context("lambda")?;
        ensure!(nx >= 1 && nz >= 1, "empty grid");
        let mut values = Vec::with_capacity((nx + 1) * (nz + 1));
        let mut rows = 0;
        for line in lines.filter(|l| !l.is_empty()) {
            let before = values.len();
            for v in line.split(',') {
                values.push(v.trim().parse::<f64>().with_context(|| format!("row {rows}: bad value `{v}`"))?);
            }
            ensure!(values.len() - before == nx + 1, "row {rows} has {} values, expected {}", values.len() - before, nx + 1);
            rows += 1;
        }
        ensure!(rows == nz + 1, "found {rows} rows, expected {}", nz + 1);
        let mut field = CylinderField::new(nx, nz, l, values)?;
        field.shift = shift;
        Ok(Self { field, lambda })
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        write(path, self.to_text())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("corrupt checkpoint {}", path.display()))
    }
}

/// `x,z,u1,u2,p,div`; `div` is the matched-stencil divergence, `nan` on the
/// window edge where the stencil does not fit.
pub fn flow_csv(flow: &EulerFlow) -> String {
    let g: &Samples = &flow.psi;
    let w = g.nx + 1;
    let mut s = String::from("x,z,u1,u2,p,div\n");
    for j in 0..=g.nz {
        for i in 0..=g.nx {
            let k = j * w + i;
            let div = if i > 0 && i < g.nx && j > 0 && j < g.nz {
                (flow.u1[k + 1] - flow.u1[k - 1]) / (2.0 * g.hx) + (flow.u2[k + w] - flow.u2[k - w]) / (2.0 * g.hz)
            } else {
                f64::NAN
            };
            writeln!(
                s,
                "{},{},{},{},{},{}",
                fmt17(g.x(i)),
                fmt17(g.z(j)),
                fmt17(flow.u1[k]),
                fmt17(flow.u2[k]),
                fmt17(flow.pressure[k]),
                fmt17(div)
            )
            .unwrap();
        }
    }
    s
}

pub fn theta_csv(t: &ThetaField) -> String {
    let g = &t.grid;
    let mut s = String::from("x,z,rho,theta\n");
    for j in 0..=g.nz {
        for i in 0..=g.nx {
            let k = j * (g.nx + 1) + i;
            writeln!(s, "{},{},{},{}", fmt17(g.x(i)), fmt17(g.z(j)), fmt17(t.rho[k]), fmt17(t.theta[k])).unwrap();
        }
    }
    s
}

pub fn write_text(path: &Path, text: String) -> anyhow::Result<()> {
    write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 7.148_012_345_678_9, f64::MIN_POSITIVE, -0.0] {
            assert_eq!(fmt17(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn checkpoint_round_trips_bit_identically() {
        let mut field = CylinderField::from_fn(8, 6, 1.5, |x, z| (std::f64::consts::PI * x).sin() * (1.0 + z.tanh()) / 3.0).unwrap();
        field.shift = 0.012_345;
        let c = Checkpoint { field, lambda: 0.017_213_062_3 };
        let text = c.to_text();
        let back = Checkpoint::parse(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn corrupt_checkpoints_rejected() {
        let c = Checkpoint { field: CylinderField::from_fn(4, 2, 1.0, |_, _| 0.0).unwrap(), lambda: 0.1 };
        let text = c.to_text();
        assert!(Checkpoint::parse(&text.replacen(CHECKPOINT_HEADER, "other v9", 1)).is_err());
        let lines: Vec<&str> = text.lines().collect();
        assert!(Checkpoint::parse(&lines[..lines.len() - 1].join("\n")).is_err());
        assert!(Checkpoint::parse(&text.replacen("nz,2", "nz,x", 1)).is_err());
        // Nonzero lateral value.
        let bad = text.replacen("0.0000000000000000e0,", "1.0000000000000000e0,", 7);
        assert!(Checkpoint::parse(&bad).is_err());
    }
}
