//! Protocol sweeps over the `(i_d, i_q)` plane.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::protocol::{run_protocol, ProtocolSetup, RunResult};
use crate::{Error, Result};

/// Polar grid of load points: `(i_d, i_q) = (i·sin θ, i·cos θ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepGrid {
    theta_range: (f64, f64),
    theta_steps: usize,
    current_range: (f64, f64),
    current_steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridPoint {
    pub theta_deg: f64,
    pub current: f64,
    pub i_d: f64,
    pub i_q: f64,
}

fn axis(range: (f64, f64), steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![range.0];
    }
    let span = range.1 - range.0;
    (0..steps)
        .map(|k| {
            if k == steps - 1 {
                range.1
            } else {
                range.0 + span * k as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

impl SweepGrid {
    /// Each axis needs at least two steps, or exactly one when its range is a
    /// single value.
    pub fn new(
        theta_range: (f64, f64),
        theta_steps: usize,
        current_range: (f64, f64),
        current_steps: usize,
    ) -> Result<Self> {
        for (name, (lo, hi), steps) in [
            ("theta", theta_range, theta_steps),
            ("current", current_range, current_steps),
        ] {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::Config(format!(
                    "{name} range must be finite and ordered"
                )));
            }
            if steps == 0 || (steps == 1 && lo != hi) || (steps > 1 && lo == hi) {
                return Err(Error::Config(format!(
                    "{name} axis needs >= 2 steps over a non-empty range, or 1 step over a single value"
                )));
            }
        }
        if current_range.0 < 0.0 {
            return Err(Error::Config(
                "current magnitudes must be non-negative".into(),
            ));
        }
        Ok(SweepGrid {
            theta_range,
            theta_steps,
            current_range,
            current_steps,
        })
    }

    pub fn single(theta_deg: f64, current: f64) -> Result<Self> {
        Self::new((theta_deg, theta_deg), 1, (current, current), 1)
    }

    pub fn len(&self) -> usize {
        self.theta_steps * self.current_steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn current_limit(&self) -> f64 {
        self.current_range.1.abs().max(self.current_range.0.abs())
    }

    pub fn thetas(&self) -> Vec<f64> {
        axis(self.theta_range, self.theta_steps)
    }

    pub fn currents(&self) -> Vec<f64> {
        axis(self.current_range, self.current_steps)
    }

    /// Grid points, θ outer and current inner.
    pub fn points(&self) -> Vec<GridPoint> {
        let currents = self.currents();
        self.thetas()
            .into_iter()
            .flat_map(|theta_deg| {
                currents
                    .iter()
                    .map(move |&current| GridPoint::new(theta_deg, current))
            })
            .collect()
    }
}

impl GridPoint {
    pub fn new(theta_deg: f64, current: f64) -> Self {
        let (s, c) = theta_deg.to_radians().sin_cos();
        // Snap round-off at the axes (cos 90° ≈ 6e-17) and drop −0.
        let snap = |v: f64| {
            if v.abs() <= 1e-12 * current {
                0.0
            } else {
                v + 0.0
            }
        };
        GridPoint {
            theta_deg,
            current,
            i_d: snap(current * s),
            i_q: snap(current * c),
        }
    }
}

/// The values written per successful sweep point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RowValues {
    pub ms_b_m2: f64,
    pub ms_b_m3: f64,
    pub ms_j_m2: f64,
    pub ms_j_m3: f64,
    pub ms_flux: f64,
    pub ms_emf: f64,
    pub rem_m2: f64,
    pub rem_m3: f64,
}

pub const METRIC_COLUMNS: [&str; 8] = [
    "ms_b_m2", "ms_b_m3", "ms_j_m2", "ms_j_m3", "ms_flux", "ms_emf", "rem_m2_T", "rem_m3_T",
];

pub const CSV_HEADER: [&str; 11] = [
    "id_A", "iq_A", "ms_b_m2", "ms_b_m3", "ms_j_m2", "ms_j_m3", "ms_flux", "ms_emf", "rem_m2_T",
    "rem_m3_T", "error",
];

impl RowValues {
    pub fn from_run(run: &RunResult) -> Self {
        use crate::motor::MagnetRole;
        RowValues {
            ms_b_m2: run.ms.ms_b[0],
            ms_b_m3: run.ms.ms_b[1],
            ms_j_m2: run.ms.ms_j[0],
            ms_j_m3: run.ms.ms_j[1],
            ms_flux: run.ms.ms_flux,
            ms_emf: run.ms.ms_emf,
            rem_m2: run.remanence_of(MagnetRole::Lcf2),
            rem_m3: run.remanence_of(MagnetRole::Lcf3),
        }
    }

    pub fn as_array(&self) -> [f64; 8] {
        [
            self.ms_b_m2,
            self.ms_b_m3,
            self.ms_j_m2,
            self.ms_j_m3,
            self.ms_flux,
            self.ms_emf,
            self.rem_m2,
            self.rem_m3,
        ]
    }

    fn from_array(v: [f64; 8]) -> Self {
        RowValues {
            ms_b_m2: v[0],
            ms_b_m3: v[1],
            ms_j_m2: v[2],
            ms_j_m3: v[3],
            ms_flux: v[4],
            ms_emf: v[5],
            rem_m2: v[6],
            rem_m3: v[7],
        }
    }

    /// Value of a metric column by its CSV name.
    pub fn metric(&self, column: &str) -> Result<f64> {
        let idx = METRIC_COLUMNS
            .iter()
            .position(|c| *c == column)
            .ok_or_else(|| Error::UnknownColumn(column.to_string()))?;
        Ok(self.as_array()[idx])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub point: GridPoint,
    /// Metrics, or the error message of a failed run.
    pub outcome: std::result::Result<RowValues, String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

fn evaluate(setup: &ProtocolSetup, point: GridPoint) -> SweepRow {
    let outcome = run_protocol(setup, point.i_d, point.i_q)
        .map_err(|e| e.to_string())
        .and_then(|run| {
            let values = RowValues::from_run(&run);
            if values.as_array().iter().all(|v| v.is_finite()) {
                Ok(values)
            } else {
                Err("non-finite metric".to_string())
            }
        });
    SweepRow { point, outcome }
}

/// Run one fresh protocol per grid point.
///
/// `parallelism` is the worker count (0 = all cores). Rows come back in grid
/// order whatever the scheduling.
pub fn run_sweep(
    grid: &SweepGrid,
    setup: &ProtocolSetup,
    parallelism: usize,
) -> Result<SweepTable> {
    let points = grid.points();
    let rows = if parallelism == 1 {
        points.into_iter().map(|p| evaluate(setup, p)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| points.into_par_iter().map(|p| evaluate(setup, p)).collect())
    };
    Ok(SweepTable { rows })
}

impl SweepTable {
    pub fn error_count(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    /// (min, max) of a metric column over successful rows.
    pub fn column_range(&self, column: &str) -> Result<Option<(f64, f64)>> {
        let mut range: Option<(f64, f64)> = None;
        for row in &self.rows {
            if let Ok(values) = &row.outcome {
                let v = values.metric(column)?;
                range = Some(match range {
                    None => (v, v),
                    Some((lo, hi)) => (lo.min(v), hi.max(v)),
                });
            } else if !METRIC_COLUMNS.contains(&column) {
                return Err(Error::UnknownColumn(column.to_string()));
            }
        }
        if range.is_none() && !METRIC_COLUMNS.contains(&column) {
            return Err(Error::UnknownColumn(column.to_string()));
        }
        Ok(range)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        writer.write_record(CSV_HEADER)?;
        for row in &self.rows {
            let mut record = vec![format_sig(row.point.i_d), format_sig(row.point.i_q)];
            match &row.outcome {
                Ok(values) => {
                    record.extend(values.as_array().iter().map(|v| format_sig(*v)));
                    record.push(String::new());
                }
                Err(message) => {
                    record.extend(std::iter::repeat_n(String::new(), 8));
                    record.push(message.replace(['\n', '\r'], " "));
                }
            }
            writer.write_record(&record)?;
        }
        writer.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    pub fn emit_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// One parsed CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRecord {
    pub i_d: f64,
    pub i_q: f64,
    pub outcome: std::result::Result<RowValues, String>,
}

impl From<&SweepRow> for CsvRecord {
    fn from(row: &SweepRow) -> Self {
        CsvRecord {
            i_d: row.point.i_d,
            i_q: row.point.i_q,
            outcome: row.outcome.clone(),
        }
    }
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<CsvRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Input(format!("unexpected CSV header {header:?}")));
    }
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| Error::Input(format!("bad number `{s}`")))
    };
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let error = rec.get(10).unwrap_or_default();
        let outcome = if error.is_empty() {
            let mut v = [0.0; 8];
            for (k, slot) in v.iter_mut().enumerate() {
                *slot = parse(&rec[k + 2])?;
            }
            Ok(RowValues::from_array(v))
        } else {
            Err(error.to_string())
        };
        records.push(CsvRecord {
            i_d: parse(&rec[0])?,
            i_q: parse(&rec[1])?,
            outcome,
        });
    }
    Ok(records)
}

/// Nine significant digits, `%g` style.
pub fn format_sig(value: f64) -> String {
    const DIGITS: i32 = 9;
    if value == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, value);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim(format!("{value:.decimals$}"))
    } else {
        format!("{}e{}", trim(mantissa.to_string()), exp)
    }
}
