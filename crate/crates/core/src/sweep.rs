//! Parameter scans over a state family and threshold location by bisection.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::criteria::Criterion;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::statefile::{format_f64, number};
use crate::states::Family;

/// Bracket width at which threshold bisection stops.
pub const BISECTION_TOL: f64 = 1e-6;

const MAX_GRID_POINTS: usize = 10_000_000;

/// An inclusive grid `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::InvalidArgument("grid bounds must be finite".into()));
        }
        if start > stop {
            return Err(Error::InvalidArgument(format!("grid start {start} exceeds stop {stop}")));
        }
        if !(step > 0.0) {
            return Err(Error::InvalidArgument(format!("grid step {step} must be positive")));
        }
        let grid = Self { start, stop, step };
        if grid.intervals() >= MAX_GRID_POINTS {
            return Err(Error::InvalidArgument("grid has too many points".into()));
        }
        Ok(grid)
    }

    fn intervals(&self) -> usize {
        let n = ((self.stop - self.start) / self.step + 0.5).floor() as usize;
        if self.stop > self.start {
            n.max(1)
        } else {
            0
        }
    }

    /// `start + i·step`, with the last point pinned to `stop`.
    ///
    /// The final interval is therefore between half a step and one and a
    /// half steps long, unless the whole range is shorter than that.
    pub fn points(&self) -> Vec<f64> {
        let n = self.intervals();
        let mut xs: Vec<f64> = (0..=n).map(|i| self.start + i as f64 * self.step).collect();
        xs[n] = self.stop;
        xs
    }
}

impl FromStr for Grid {
    type Err = Error;

    /// `start:stop:step`, or a single value for a one-point grid.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad grid spec `{s}`, expected start:stop:step"));
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match parts[..] {
            [x] => Grid::new(x, x, 1.0),
            [start, stop, step] => Grid::new(start, stop, step),
            _ => Err(bad()),
        }
    }
}

/// Witness and verdict of one criterion at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanCell {
    pub criterion: Criterion,
    pub witness: f64,
    pub detected: bool,
}

/// One grid point of a scan; `cells` follows the requested criteria order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub x: f64,
    pub cells: Vec<ScanCell>,
}

impl Serialize for ScanRow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(1 + 2 * self.cells.len()))?;
        map.serialize_entry("x", &number(self.x))?;
        for c in &self.cells {
            map.serialize_entry(&format!("{}_witness", c.criterion.id()), &number(c.witness))?;
            map.serialize_entry(&format!("{}_detected", c.criterion.id()), &c.detected)?;
        }
        map.end()
    }
}

/// Evaluates every criterion at every point of `xs`; rows come back in input order.
pub fn scan(family: &Family, xs: &[f64], criteria: &[Criterion], exec: Execution) -> Result<Vec<ScanRow>> {
    if criteria.is_empty() {
        return Err(Error::InvalidArgument("empty criteria list".into()));
    }
    exec.map_indexed(xs.len(), |i| {
        let x = xs[i];
        let rho = family.state(x)?;
        let cells = criteria
            .iter()
            .map(|c| {
                let r = c.evaluate(&rho)?;
                Ok(ScanCell {
                    criterion: *c,
                    witness: r.witness,
                    detected: r.inseparable_detected,
                })
            })
            .collect::<Result<_>>()?;
        Ok(ScanRow { x, cells })
    })
    .into_iter()
    .collect()
}

/// CSV table with header `x,<id>_witness,<id>_detected,…`.
pub fn to_csv(criteria: &[Criterion], rows: &[ScanRow]) -> String {
    let mut out = String::from("x");
    for c in criteria {
        write!(out, ",{0}_witness,{0}_detected", c.id()).unwrap();
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format_f64(row.x));
        for cell in &row.cells {
            write!(out, ",{},{}", format_f64(cell.witness), cell.detected).unwrap();
        }
        out.push('\n');
    }
    out
}

/// The same table as a JSON array of row objects.
pub fn to_json(rows: &[ScanRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}

/// Bracket around the point where a criterion's verdict flips along a family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub family: Family,
    pub criterion: Criterion,
    pub x_lo: f64,
    pub x_hi: f64,
    pub x_star: f64,
    pub iterations: usize,
}

/// Bisects the detection verdict of `criterion` along `family` on `[0, 1]`.
///
/// The verdict must differ at the two ends. A second bisection on the
/// verdict without roundoff margin guards against crossings that exist
/// only because of the margin: if that bracket never leaves an end of the
/// interval, the criterion flips at the boundary itself and there is no
/// interior threshold to report.
pub fn find_threshold(family: &Family, criterion: Criterion, tol: f64) -> Result<ThresholdResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("bisection tolerance must be positive".into()));
    }
    let witness = |x: f64| -> Result<f64> { Ok(criterion.evaluate(&family.state(x)?)?.witness) };
    let margin = |x: f64| witness(x).map(|w| criterion.detects(w));
    let strict = |x: f64| witness(x).map(|w| criterion.detects_strictly(w));

    let at_zero = margin(0.0)?;
    if at_zero == margin(1.0)? {
        let verdict = if at_zero { "detected" } else { "not detected" };
        return Err(Error::NoSignChange {
            note: format!("{} on {} is {verdict} at both x = 0 and x = 1", criterion.id(), family.name()),
        });
    }
    let (x_lo, x_hi, iterations) = bisect(margin, at_zero, tol)?;

    let (s_lo, s_hi, _) = bisect(strict, strict(0.0)?, tol)?;
    if s_lo == 0.0 || s_hi == 1.0 {
        let end = if s_lo == 0.0 { "x_lo = 0" } else { "x_hi = 1" };
        return Err(Error::NoSignChange {
            note: format!(
                "{} on {} flips at the boundary: the crossing collapses onto {end} \
                 (the detection margin alone moves it to x ≈ {:.3e})",
                criterion.id(),
                family.name(),
                0.5 * (x_lo + x_hi)
            ),
        });
    }
    Ok(ThresholdResult {
        family: *family,
        criterion,
        x_lo,
        x_hi,
        x_star: 0.5 * (x_lo + x_hi),
        iterations,
    })
}

fn bisect(mut verdict: impl FnMut(f64) -> Result<bool>, at_zero: bool, tol: f64) -> Result<(f64, f64, usize)> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if verdict(mid)? == at_zero {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok((lo, hi, iterations))
}

impl Serialize for Family {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Family::Gisin { a, b } => {
                let mut map = s.serialize_map(Some(3))?;
                map.serialize_entry("name", self.name())?;
                map.serialize_entry("a", &[a.re, a.im])?;
                map.serialize_entry("b", &[b.re, b.im])?;
                map.end()
            }
            _ => {
                let mut map = s.serialize_map(Some(1))?;
                map.serialize_entry("name", self.name())?;
                map.end()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn grid_parsing_and_points() {
        let g: Grid = "0:1:0.25".parse().unwrap();
        assert_eq!(g.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g: Grid = "0:1:0.1".parse().unwrap();
        let xs = g.points();
        assert_eq!(xs.len(), 11);
        assert_eq!(*xs.last().unwrap(), 1.0);
        assert_eq!("0.4".parse::<Grid>().unwrap().points(), vec![0.4]);
        // 1.2 would overshoot, so the last point is pinned to stop
        assert_eq!("0:1:0.4".parse::<Grid>().unwrap().points(), vec![0.0, 0.4, 0.8, 1.0]);
        assert_eq!("0:0.1:1".parse::<Grid>().unwrap().points(), vec![0.0, 0.1]);
        for bad in ["", "1:0:0.1", "0:1:0", "0:1:-1", "0:1", "a:b:c", "0:1:nan"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
    }

    #[test]
    fn werner_scan_matches_one_third() {
        let xs = "0:1:0.25".parse::<Grid>().unwrap().points();
        let rows = scan(&Family::Werner, &xs, &[Criterion::Ppt], Execution::Sequential).unwrap();
        let detected: Vec<bool> = rows.iter().map(|r| r.cells[0].detected).collect();
        assert_eq!(detected, [false, false, true, true, true]);
    }

    #[test]
    fn scan_is_identical_across_modes() {
        let xs = "0:1:0.01".parse::<Grid>().unwrap().points();
        let fam = Family::from_name("gisin", None, None).unwrap();
        let a = scan(&fam, &xs, &Criterion::ALL, Execution::Sequential).unwrap();
        let b = scan(&fam, &xs, &Criterion::ALL, Execution::Parallel).unwrap();
        assert_eq!(to_csv(&Criterion::ALL, &a), to_csv(&Criterion::ALL, &b));
    }

    #[test]
    fn csv_and_json_share_fields() {
        let crit = [Criterion::Ppt, Criterion::Renyi2];
        let rows = scan(&Family::Werner, &[0.5], &crit, Execution::Sequential).unwrap();
        let csv = to_csv(&crit, &rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "x,ppt_witness,ppt_detected,renyi2_witness,renyi2_detected");
        assert_eq!(lines.next().unwrap().split(',').count(), 5);
        let json: serde_json::Value = serde_json::from_str(&to_json(&rows)).unwrap();
        let obj = json[0].as_object().unwrap();
        assert_eq!(obj.len(), 5);
        assert_eq!(obj["ppt_detected"], serde_json::Value::Bool(true));
        assert_eq!(obj["ppt_witness"].as_f64().unwrap(), rows[0].cells[0].witness);
    }

    #[test]
    fn scan_rejects_bad_parameters() {
        assert!(scan(&Family::Werner, &[1.5], &[Criterion::Ppt], Execution::Sequential).is_err());
        assert!(scan(&Family::Werner, &[0.5], &[], Execution::Sequential).is_err());
    }

    #[test]
    fn werner_thresholds() {
        let want = [
            (Criterion::Ppt, 1.0 / 3.0),
            (Criterion::ChshHorodecki, 0.5f64.sqrt()),
            (Criterion::Renyi2, 1.0 / 3.0f64.sqrt()),
        ];
        for (c, x) in want {
            let t = find_threshold(&Family::Werner, c, BISECTION_TOL).unwrap();
            assert!((t.x_star - x).abs() < 1e-6, "{c}: {}", t.x_star);
            assert!(t.x_lo < t.x_star && t.x_star < t.x_hi);
            assert!(t.x_hi - t.x_lo <= 2.0 * BISECTION_TOL);
        }
    }

    #[test]
    fn gisin_ppt_threshold_off_balance() {
        let fam = Family::from_name("gisin", Some(Complex64::new(0.6, 0.0)), Some(Complex64::new(0.8, 0.0))).unwrap();
        let t = find_threshold(&fam, Criterion::Ppt, BISECTION_TOL).unwrap();
        assert!((t.x_star - 1.0 / 1.96).abs() < 1e-6);
    }

    #[test]
    fn boundary_crossing_is_reported() {
        let err = find_threshold(&Family::SingletPolarized, Criterion::Ppt, BISECTION_TOL).unwrap_err();
        match err {
            Error::NoSignChange { note } => assert!(note.contains("x_lo = 0"), "{note}"),
            other => panic!("{other:?}"),
        }
        // b = 0 leaves only classical correlations
        let fam = Family::from_name("gisin", Some(Complex64::new(1.0, 0.0)), Some(Complex64::new(0.0, 0.0))).unwrap();
        assert!(matches!(
            find_threshold(&fam, Criterion::Ppt, BISECTION_TOL),
            Err(Error::NoSignChange { .. })
        ));
    }
}
