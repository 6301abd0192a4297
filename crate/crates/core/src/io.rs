//! Text formats: signal tables, weight lists and model files.
//!
//! Signal tables hold one row per sample and one column per signal
//! (or two columns, real then imaginary, for complex input). Cells are
//! separated by commas and/or whitespace; blank lines and lines starting
//! with `#` are ignored. Rows follow the grid's row-major flattening.
//!
//! Every float is written with 17 significant digits so files round-trip
//! exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fiber::SignalSet;
use crate::grid::GridSpec;
use crate::linalg::C64;
use crate::model::{GeneratorSystem, SisModel, WeightVector};
use crate::tolerance::Tolerances;

pub const FORMAT_VERSION: u32 = 1;
const MODEL_MAGIC: &str = "# sisfit model";

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputLayout {
    /// Per-axis sizes; `None` means one axis spanning all rows.
    pub axes: Option<Vec<usize>>,
    pub phases: Vec<usize>,
    /// Columns come in (re, im) pairs.
    pub complex: bool,
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let t = l.trim();
        (!t.is_empty() && !t.starts_with('#')).then_some((i + 1, t))
    })
}

fn split_cells(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
}

fn parse_cell(cell: &str, line: usize, col: usize) -> Result<f64> {
    let v: f64 = cell
        .parse()
        .map_err(|_| Error::parse(line, format!("column {col}: '{cell}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("column {col}: non-finite value '{cell}'")));
    }
    Ok(v)
}

pub fn parse_signals_str(text: &str, layout: &InputLayout) -> Result<SignalSet> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    let mut last_line = 0;
    for (line, content) in data_lines(text) {
        let row = split_cells(content)
            .enumerate()
            .map(|(c, cell)| parse_cell(cell, line, c + 1))
            .collect::<Result<Vec<f64>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::parse(
                    line,
                    format!("expected {w} columns, found {}", row.len()),
                ))
            }
            _ => {}
        }
        rows.push(row);
        last_line = line;
    }
    let width = width.ok_or_else(|| Error::parse(0, "no data rows"))?;
    if layout.complex && width % 2 != 0 {
        return Err(Error::parse(
            last_line,
            format!("complex input needs an even column count, found {width}"),
        ));
    }

    let axes = layout.axes.clone().unwrap_or_else(|| vec![rows.len()]);
    let expected: usize = axes.iter().product();
    if expected != rows.len() {
        return Err(Error::parse(
            last_line,
            format!("grid has {expected} samples but file has {} rows", rows.len()),
        ));
    }
    let grid = GridSpec::new(axes, layout.phases.clone())
        .map_err(|e| Error::parse(last_line, e.to_string()))?;

    let m = if layout.complex { width / 2 } else { width };
    let samples = (0..m)
        .map(|j| {
            rows.iter()
                .map(|r| {
                    if layout.complex {
                        C64::new(r[2 * j], r[2 * j + 1])
                    } else {
                        C64::new(r[j], 0.0)
                    }
                })
                .collect()
        })
        .collect();
    SignalSet::new(grid, samples)
}

pub fn parse_signals(path: &Path, layout: &InputLayout) -> Result<SignalSet> {
    parse_signals_str(&fs::read_to_string(path)?, layout)
}

/// Renders signals in the table format. Complex output writes (re, im) pairs.
pub fn render_signals(signals: &[Vec<C64>], complex: bool) -> String {
    let n = signals.first().map_or(0, |s| s.len());
    let mut out = String::new();
    for k in 0..n {
        let cells: Vec<String> = signals
            .iter()
            .flat_map(|s| {
                if complex {
                    vec![fmt_f64(s[k].re), fmt_f64(s[k].im)]
                } else {
                    vec![fmt_f64(s[k].re)]
                }
            })
            .collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_weights_str(text: &str) -> Result<WeightVector> {
    let mut values = Vec::new();
    for (line, content) in data_lines(text) {
        for (c, cell) in split_cells(content).enumerate() {
            values.push(parse_cell(cell, line, c + 1)?);
        }
    }
    WeightVector::new(values)
}

pub fn parse_weights(path: &Path) -> Result<WeightVector> {
    parse_weights_str(&fs::read_to_string(path)?)
}

/// On-disk form of a fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub format_version: u32,
    pub axes: Vec<usize>,
    pub phases: Vec<usize>,
    pub n: usize,
    pub signal_count: usize,
    pub generators: Vec<Vec<C64>>,
    /// `E(F, 0..=m)`.
    pub curve: Vec<f64>,
    pub unique: bool,
    pub min_gap: f64,
    pub r_min: usize,
    pub r_max: usize,
    pub length_actual: usize,
    pub weighted: bool,
    pub tolerances: Tolerances,
}

impl ModelFile {
    pub fn from_model(model: &SisModel) -> Self {
        ModelFile {
            format_version: FORMAT_VERSION,
            axes: model.grid().axes().to_vec(),
            phases: model.grid().phases().to_vec(),
            n: model.requested(),
            signal_count: model.signal_count(),
            generators: model.generators().to_vec(),
            curve: model.curve().to_vec(),
            unique: model.unique(),
            min_gap: model.min_gap(),
            r_min: model.r_min(),
            r_max: model.r_max(),
            length_actual: model.length_actual(),
            weighted: model.weighted(),
            tolerances: *model.tolerances(),
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.axes.clone(), self.phases.clone())
    }

    pub fn system(&self) -> Result<GeneratorSystem> {
        GeneratorSystem::from_generators(self.grid()?, self.generators.clone())
    }

    /// Error stored for the model's own order.
    pub fn error(&self) -> f64 {
        self.curve[self.n.min(self.signal_count)]
    }

    pub fn render(&self) -> String {
        let join_usize = |v: &[usize]| {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        };
        let mut s = String::new();
        let _ = writeln!(s, "{MODEL_MAGIC}");
        let _ = writeln!(s, "format_version = {}", self.format_version);
        let _ = writeln!(s, "dims = {}", self.axes.len());
        let _ = writeln!(s, "axes = {}", join_usize(&self.axes));
        let _ = writeln!(s, "phases = {}", join_usize(&self.phases));
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "signals = {}", self.signal_count);
        let _ = writeln!(s, "generators = {}", self.generators.len());
        let _ = writeln!(s, "unique = {}", self.unique);
        let _ = writeln!(s, "min_gap = {}", fmt_f64(self.min_gap));
        let _ = writeln!(s, "r_min = {}", self.r_min);
        let _ = writeln!(s, "r_max = {}", self.r_max);
        let _ = writeln!(s, "length = {}", self.length_actual);
        let _ = writeln!(s, "weighted = {}", self.weighted);
        let _ = writeln!(s, "rank_tol = {}", fmt_f64(self.tolerances.rank));
        let _ = writeln!(s, "gap_tol = {}", fmt_f64(self.tolerances.gap));
        let curve: Vec<String> = self.curve.iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(s, "curve = {}", curve.join(" "));
        for (i, g) in self.generators.iter().enumerate() {
            let _ = writeln!(s, "[generator {i}]");
            for z in g {
                let _ = writeln!(s, "{} {}", fmt_f64(z.re), fmt_f64(z.im));
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, MODEL_MAGIC)) => {}
            _ => return Err(Error::parse(1, format!("expected '{MODEL_MAGIC}' header"))),
        }

        let mut header = Vec::new();
        let mut pending = None;
        for (line, content) in lines.by_ref() {
            if content.starts_with('[') {
                pending = Some((line, content));
                break;
            }
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| Error::parse(line, "expected 'key = value'"))?;
            header.push((line, k.trim().to_string(), v.trim().to_string()));
        }

        let field = |key: &str| -> Result<(usize, &str)> {
            header
                .iter()
                .find(|(_, k, _)| k == key)
                .map(|(l, _, v)| (*l, v.as_str()))
                .ok_or_else(|| Error::parse(0, format!("missing field '{key}'")))
        };
        fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::parse(line, format!("bad value for '{key}': '{v}'")))
        }
        let get = |key: &str| -> Result<usize> {
            let (l, v) = field(key)?;
            num(l, key, v)
        };
        let get_f = |key: &str| -> Result<f64> {
            let (l, v) = field(key)?;
            num(l, key, v)
        };
        let get_b = |key: &str| -> Result<bool> {
            let (l, v) = field(key)?;
            num(l, key, v)
        };
        let get_list = |key: &str| -> Result<Vec<usize>> {
            let (l, v) = field(key)?;
            v.split(',').map(|x| num(l, key, x.trim())).collect()
        };

        let format_version = get("format_version")? as u32;
        if format_version != FORMAT_VERSION {
            return Err(Error::parse(
                field("format_version")?.0,
                format!("unsupported format_version {format_version}"),
            ));
        }
        let axes = get_list("axes")?;
        let phases = get_list("phases")?;
        if get("dims")? != axes.len() {
            return Err(Error::parse(field("dims")?.0, "dims disagrees with axes"));
        }
        let count = get("generators")?;
        let (curve_line, curve_text) = field("curve")?;
        let curve = curve_text
            .split_whitespace()
            .map(|x| num(curve_line, "curve", x))
            .collect::<Result<Vec<f64>>>()?;
        let signal_count = get("signals")?;
        if curve.len() != signal_count + 1 {
            return Err(Error::parse(curve_line, "curve must have signals + 1 entries"));
        }

        let total: usize = axes.iter().product();
        let mut generators = Vec::with_capacity(count);
        let mut section = pending;
        while let Some((line, head)) = section.take() {
            let expected = format!("[generator {}]", generators.len());
            if head != expected {
                return Err(Error::parse(line, format!("expected '{expected}'")));
            }
            let mut g = Vec::with_capacity(total);
            for (line, content) in lines.by_ref() {
                if content.starts_with('[') {
                    section = Some((line, content));
                    break;
                }
                if content.is_empty() {
                    continue;
                }
                let mut it = content.split_whitespace();
                let (re, im) = match (it.next(), it.next(), it.next()) {
                    (Some(re), Some(im), None) => (re, im),
                    _ => return Err(Error::parse(line, "expected 're im'")),
                };
                g.push(C64::new(num(line, "re", re)?, num(line, "im", im)?));
            }
            if g.len() != total {
                return Err(Error::parse(
                    line,
                    format!("generator has {} samples, grid has {total}", g.len()),
                ));
            }
            generators.push(g);
        }
        if generators.len() != count {
            return Err(Error::parse(
                0,
                format!("expected {count} generators, found {}", generators.len()),
            ));
        }

        Ok(ModelFile {
            format_version,
            axes,
            phases,
            n: get("n")?,
            signal_count,
            generators,
            curve,
            unique: get_b("unique")?,
            min_gap: get_f("min_gap")?,
            r_min: get("r_min")?,
            r_max: get("r_max")?,
            length_actual: get("length")?,
            weighted: get_b("weighted")?,
            tolerances: Tolerances {
                rank: get_f("rank_tol")?,
                gap: get_f("gap_tol")?,
            },
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }
}
