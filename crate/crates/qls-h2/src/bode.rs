use std::str::FromStr;

use nalgebra::Complex;
use qls_core::QuantumLinearSystem;

use crate::error::H2Error;
use crate::transfer::transfer_eval;

/// Log-spaced grid `ω_min..=ω_max` (rad/s) with a fixed density per decade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub w_min: f64,
    pub w_max: f64,
    pub points_per_decade: usize,
}

impl FrequencyGrid {
    pub fn new(w_min: f64, w_max: f64, points_per_decade: usize) -> Result<Self, H2Error> {
        if !(w_min > 0.0 && w_max.is_finite() && w_min < w_max) {
            return Err(H2Error::Grid(format!(
                "need 0 < w_min < w_max, got {w_min}..{w_max}"
            )));
        }
        if points_per_decade == 0 {
            return Err(H2Error::Grid("points per decade must be positive".into()));
        }
        Ok(FrequencyGrid {
            w_min,
            w_max,
            points_per_decade,
        })
    }

    pub fn points(&self) -> Vec<f64> {
        let decades = (self.w_max / self.w_min).log10();
        let n = (decades * self.points_per_decade as f64).ceil() as usize;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.w_max
                } else {
                    self.w_min * 10f64.powf(i as f64 / self.points_per_decade as f64)
                }
            })
            .collect()
    }
}

impl FromStr for FrequencyGrid {
    type Err = H2Error;

    /// `wmin:wmax:ppd`, e.g. `1e-2:1e2:400`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(H2Error::Grid(format!("expected wmin:wmax:ppd, got {s:?}")));
        }
        let bad = |p: &str| H2Error::Grid(format!("cannot parse {p:?} in {s:?}"));
        let w_min: f64 = parts[0].trim().parse().map_err(|_| bad(parts[0]))?;
        let w_max: f64 = parts[1].trim().parse().map_err(|_| bad(parts[1]))?;
        let ppd: usize = parts[2].trim().parse().map_err(|_| bad(parts[2]))?;
        FrequencyGrid::new(w_min, w_max, ppd)
    }
}

/// Quadrature-level channel, zero-based `(output row, input column)` of the
/// `2l × 2m` transfer matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Channel {
    pub out: usize,
    pub inp: usize,
}

impl Channel {
    pub fn new(out: usize, inp: usize) -> Self {
        Channel { out, inp }
    }

    /// The four quadrature channels linking output field `out_field` to input
    /// field `in_field` (both zero-based).
    pub fn field(out_field: usize, in_field: usize) -> [Channel; 4] {
        let (o, i) = (2 * out_field, 2 * in_field);
        [
            Channel::new(o, i),
            Channel::new(o, i + 1),
            Channel::new(o + 1, i),
            Channel::new(o + 1, i + 1),
        ]
    }

    /// One-based label, `o2i2` for the second output and second input.
    pub fn label(&self) -> String {
        format!("o{}i{}", self.out + 1, self.inp + 1)
    }
}

/// Magnitude (dB) and unwrapped phase (degrees) per system and channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    pub omega: Vec<f64>,
    /// Column names after `omega`.
    pub columns: Vec<String>,
    /// `rows[k][c]` matches `omega[k]` and `columns[c]`.
    pub rows: Vec<Vec<f64>>,
}

impl FrequencyTable {
    pub fn header(&self) -> Vec<String> {
        std::iter::once("omega".to_string())
            .chain(self.columns.iter().cloned())
            .collect()
    }

    /// Values of one named column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(self.header()).expect("in-memory write");
        for (k, row) in self.rows.iter().enumerate() {
            let rec = std::iter::once(self.omega[k])
                .chain(row.iter().copied())
                .map(|v| v.to_string());
            w.write_record(rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }
}

fn unwrap_degrees(phase: &mut [f64]) {
    for k in 1..phase.len() {
        let mut d = phase[k] - phase[k - 1];
        while d > 180.0 {
            phase[k] -= 360.0;
            d -= 360.0;
        }
        while d < -180.0 {
            phase[k] += 360.0;
            d += 360.0;
        }
    }
}

/// Bode data for each `(name, system)` over `grid` on the given channels.
pub fn freq_response_export(
    systems: &[(&str, &QuantumLinearSystem<f64>)],
    grid: &FrequencyGrid,
    channels: &[Channel],
) -> Result<FrequencyTable, H2Error> {
    let omega = grid.points();
    let mut columns = Vec::new();
    let mut data: Vec<Vec<f64>> = Vec::new();
    for (name, sys) in systems {
        for ch in channels {
            if ch.out >= sys.c().nrows() || ch.inp >= sys.b().ncols() {
                return Err(H2Error::ChannelIndex {
                    out: ch.out,
                    inp: ch.inp,
                    rows: sys.c().nrows(),
                    cols: sys.b().ncols(),
                });
            }
        }
        let samples = omega
            .iter()
            .map(|&w| transfer_eval(sys, Complex::new(0.0, w)))
            .collect::<Result<Vec<_>, _>>()?;
        for ch in channels {
            let mag: Vec<f64> = samples
                .iter()
                .map(|g| 20.0 * g[(ch.out, ch.inp)].norm().log10())
                .collect();
            let mut phase: Vec<f64> = samples
                .iter()
                .map(|g| g[(ch.out, ch.inp)].arg().to_degrees())
                .collect();
            unwrap_degrees(&mut phase);
            columns.push(format!("{name}_{}_mag_db", ch.label()));
            data.push(mag);
            columns.push(format!("{name}_{}_phase_deg", ch.label()));
            data.push(phase);
        }
    }
    let rows = (0..omega.len())
        .map(|k| data.iter().map(|col| col[k]).collect())
        .collect();
    Ok(FrequencyTable {
        omega,
        columns,
        rows,
    })
}
