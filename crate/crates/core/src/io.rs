//! CSV, binary and SVG output.
//!
//! CSV files are RFC 4180 with a header row; numbers use `.` as decimal
//! separator and exponent notation with 12 fractional digits.
//!
//! The binary trajectory dump is little-endian:
//!
//! ```text
//! b"SQHZ1"            5 bytes
//! N                   u64, nodes per record
//! n_records           u64
//! per record:         t, A[N], I[N], V[N]   as f64
//! ```

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::dispersion::DispersionCurve;
use crate::error::{invalid, Result};
use crate::geometry::HorizonSample;
use crate::lattice::Trajectory;

pub const BINARY_MAGIC: &[u8; 5] = b"SQHZ1";

pub fn fmt_num(x: f64) -> String {
    format!("{x:.12e}")
}

/// Writes a header row and numeric rows.
pub fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_num(*v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `t,node,A,I,V`, one row per node per record.
pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "node", "A", "I", "V"])?;
    for rec in &traj.records {
        let v = rec.voltage();
        let t = fmt_num(rec.t);
        for n in 0..rec.len() {
            w.write_record([
                t.as_str(),
                &n.to_string(),
                &fmt_num(rec.a[n]),
                &fmt_num(rec.current[n]),
                &fmt_num(v[n]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `t,node,A` for each probe.
pub fn write_probe_csv<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "node", "A"])?;
    for (j, rec) in traj.records.iter().enumerate() {
        for (series, node) in traj.probe_series.iter().zip(&traj.probes) {
            w.write_record([fmt_num(rec.t), node.to_string(), fmt_num(series[j])])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_energy_csv<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let rows: Vec<Vec<f64>> = traj.energy.iter().map(|&(t, e)| vec![t, e]).collect();
    write_table(out, &["t", "energy_J"], &rows)
}

pub fn write_binary<W: Write>(mut out: W, traj: &Trajectory) -> Result<()> {
    let n = traj.records.first().map_or(0, |r| r.len());
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&(n as u64).to_le_bytes())?;
    out.write_all(&(traj.records.len() as u64).to_le_bytes())?;
    for rec in &traj.records {
        if rec.len() != n {
            return Err(invalid("records of unequal length"));
        }
        out.write_all(&rec.t.to_le_bytes())?;
        for column in [&rec.a, &rec.current, &rec.voltage()] {
            for v in column.iter() {
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BinaryRecord {
    pub t: f64,
    pub a: Vec<f64>,
    pub current: Vec<f64>,
    pub voltage: Vec<f64>,
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Vec<BinaryRecord>> {
    let mut magic = [0u8; 5];
    input.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(invalid("not a trajectory dump (bad magic)"));
    }
    let mut word = [0u8; 8];
    let mut next = |input: &mut R| -> Result<[u8; 8]> {
        input.read_exact(&mut word)?;
        Ok(word)
    };
    let n = u64::from_le_bytes(next(&mut input)?) as usize;
    let n_records = u64::from_le_bytes(next(&mut input)?) as usize;
    let mut column = |input: &mut R| -> Result<Vec<f64>> {
        (0..n).map(|_| Ok(f64::from_le_bytes(next(input)?))).collect()
    };
    let mut records = Vec::with_capacity(n_records);
    for _ in 0..n_records {
        let mut buf = [0u8; 8];
        input.read_exact(&mut buf)?;
        records.push(BinaryRecord {
            t: f64::from_le_bytes(buf),
            a: column(&mut input)?,
            current: column(&mut input)?,
            voltage: column(&mut input)?,
        });
    }
    Ok(records)
}

/// Columns `t,x_h,grad_c,T_H_K,power_W`.
pub fn write_horizon_csv<W: Write>(out: W, samples: &[HorizonSample]) -> Result<()> {
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| vec![s.t, s.position, s.velocity_gradient, s.temperature, s.power])
        .collect();
    write_table(out, &["t", "x_h", "grad_c", "T_H_K", "power_W"], &rows)
}

/// Columns `k,omega_analytic,omega_measured,rel_error`; the last two are
/// empty for purely analytic points.
pub fn write_dispersion_csv<W: Write>(out: W, curve: &DispersionCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "omega_analytic", "omega_measured", "rel_error"])?;
    for p in &curve.points {
        let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
        w.write_record([
            fmt_num(p.k),
            fmt_num(p.omega_analytic),
            opt(p.omega_measured),
            opt(p.rel_error()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points, dashed: false }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Marker {
    Horizontal { y: f64, label: String },
    Vertical { x: f64, label: String },
}

/// Minimal line chart rendered straight to SVG.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub markers: Vec<Marker>,
    pub y_range: Option<(f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f4e99", "#c0392b", "#2e8b57", "#8e44ad", "#d68910", "#34495e"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

impl LinePlot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        LinePlot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Default::default()
        }
    }

    pub fn series(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    pub fn marker(mut self, m: Marker) -> Self {
        self.markers.push(m);
        self
    }

    pub fn to_svg(&self) -> String {
        let xs = self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
        let (x0, x1) = extent(xs);
        let (y0, y1) = self.y_range.unwrap_or_else(|| {
            let ys = self.series.iter().flat_map(|s| s.points.iter().map(|p| p.1));
            let (lo, hi) = extent(ys);
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        });
        let pw = WIDTH - MARGIN_L - MARGIN_R;
        let ph = HEIGHT - MARGIN_T - MARGIN_B;
        let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let (px, py) = (sx(xv), sy(yv));
            let _ = writeln!(
                svg,
                r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                HEIGHT - MARGIN_B + 18.0,
                tick(xv)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                MARGIN_L - 6.0,
                py + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            MARGIN_L + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            MARGIN_T + ph / 2.0,
            MARGIN_T + ph / 2.0,
            escape(&self.y_label)
        );
        for m in &self.markers {
            let (line, label, lx, ly) = match m {
                Marker::Horizontal { y, label } => {
                    let py = sy(*y);
                    (
                        format!(r#"x1="{MARGIN_L}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}""#, MARGIN_L + pw),
                        label,
                        MARGIN_L + pw - 4.0,
                        py - 4.0,
                    )
                }
                Marker::Vertical { x, label } => {
                    let px = sx(*x);
                    (
                        format!(r#"x1="{px:.2}" y1="{MARGIN_T}" x2="{px:.2}" y2="{:.2}""#, MARGIN_T + ph),
                        label,
                        px + 4.0,
                        MARGIN_T + 14.0,
                    )
                }
            };
            let anchor = if matches!(m, Marker::Horizontal { .. }) { "end" } else { "start" };
            let _ = writeln!(svg, r##"<line {line} stroke="#777" stroke-dasharray="2 3"/>"##);
            let _ = writeln!(
                svg,
                r##"<text x="{lx:.1}" y="{ly:.1}" text-anchor="{anchor}" fill="#555">{}</text>"##,
                escape(label)
            );
        }
        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let mut d = String::new();
            for &(x, y) in s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
                let cmd = if d.is_empty() { 'M' } else { 'L' };
                let _ = write!(d, "{cmd}{:.2} {:.2} ", sx(x), sy(y).clamp(MARGIN_T - 2.0, MARGIN_T + ph + 2.0));
            }
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                svg,
                r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>"#,
                d.trim_end()
            );
            let ly = MARGIN_T + 16.0 + 16.0 * i as f64;
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{ly:.1}" fill="{color}">{}</text>"#,
                MARGIN_L + 8.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-2..1e4).contains(&a) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeState;

    fn traj() -> Trajectory {
        let mut r0 = LatticeState::zeros(3);
        r0.a = vec![1.0, 3.0, 2.0];
        r0.current = vec![0.5, -0.25, 1e-9];
        let mut r1 = r0.clone();
        r1.t = 1e-12;
        r1.a[0] = -4.0;
        Trajectory { records: vec![r0, r1], energy: vec![(0.0, 1.0), (1e-12, 1.0)], cell_length: 1.0, ..Default::default() }
    }

    #[test]
    fn binary_round_trip() {
        let t = traj();
        let mut buf = Vec::new();
        write_binary(&mut buf, &t).unwrap();
        assert_eq!(&buf[..5], b"SQHZ1");
        assert_eq!(buf.len(), 5 + 16 + 2 * 8 * (1 + 3 * 3));
        let back = read_binary(&buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].t, 1e-12);
        assert_eq!(back[1].a, t.records[1].a);
        assert_eq!(back[0].current, t.records[0].current);
        assert_eq!(back[0].voltage, vec![1.0, 2.0, -1.0]);
        assert!(read_binary(&b"NOPE!xxxxxxxxxxxxxxxx"[..]).is_err());
    }

    #[test]
    fn trajectory_csv_layout() {
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,node,A,I,V");
        assert_eq!(lines.len(), 1 + 6);
        assert_eq!(lines[2], "0.000000000000e0,1,3.000000000000e0,-2.500000000000e-1,2.000000000000e0");
    }

    #[test]
    fn dispersion_csv_blank_for_missing() {
        let curve = DispersionCurve::analytic(1.0, 1.0, 1.0, 2).unwrap();
        let mut buf = Vec::new();
        write_dispersion_csv(&mut buf, &curve).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,omega_analytic,omega_measured,rel_error\n"));
        assert!(text.lines().nth(1).unwrap().ends_with(",,"));
    }

    #[test]
    fn svg_is_well_formed() {
        let svg = LinePlot::new("a < b", "x", "y")
            .series(Series::new("s", vec![(0.0, 0.0), (1.0, 1.0)]))
            .series(Series::new("flat", vec![(0.0, 2.0), (1.0, 2.0)]).dashed())
            .marker(Marker::Horizontal { y: 0.5, label: "u".into() })
            .marker(Marker::Vertical { x: 0.5, label: "h".into() })
            .to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<path").count(), 2);
        assert!(!svg.contains("NaN"));
    }
}
