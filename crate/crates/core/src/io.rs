//! Serialization: the `GRL1` binary matrix container, CSV tables with `# key=value`
//! metadata lines, and text documents for MAP solutions, Potts models and summaries.
//!
//! Floats are written in scientific notation with 17 significant digits, which
//! round-trips every finite `f64` exactly.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gamma::ScanRow;
use crate::lasso::L1Scan;
use crate::likelihoods::LikelihoodTriple;
use crate::map_l2::{MapSolution, Penalty};
use crate::posterior::{PosteriorTrace, TraceRecord};
use crate::potts::{PottsParams, PottsSampleSet};
use crate::sampling::SampleSet;
use crate::spherical::InteractionMatrix;

pub const GRL1_MAGIC: &[u8; 4] = b"GRL1";

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| format_err(format!("not a number: {s:?}")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| format_err(format!("not an integer: {s:?}")))
}

/// Writes `GRL1`, the column count as a little-endian `u32`, then the entries row-major
/// as little-endian `f64`.
pub fn write_grl1<W: Write>(mut w: W, m: &DMatrix<f64>) -> Result<()> {
    let cols = u32::try_from(m.ncols()).map_err(|_| format_err("too many columns"))?;
    w.write_all(GRL1_MAGIC)?;
    w.write_all(&cols.to_le_bytes())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            w.write_all(&m[(i, j)].to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a `GRL1` container; the row count follows from the payload length.
pub fn read_grl1<R: Read>(mut r: R) -> Result<DMatrix<f64>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 8 || &bytes[..4] != GRL1_MAGIC {
        return Err(format_err("missing GRL1 header"));
    }
    let cols = u32::from_le_bytes(bytes[4..8].try_into().expect("four bytes")) as usize;
    let payload = &bytes[8..];
    if cols == 0 || payload.len() % (8 * cols) != 0 {
        return Err(format_err("payload is not a whole number of rows"));
    }
    let rows = payload.len() / (8 * cols);
    let values: Vec<f64> = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes"))).collect();
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

pub fn save_grl1(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_grl1(&mut w, m)?;
    w.flush()?;
    Ok(())
}

pub fn load_grl1(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    read_grl1(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// A CSV table preceded by `# key=value` metadata lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self { meta: Vec::new(), columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push_floats(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| fmt_f64(x)).collect());
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| format_err(format!("missing column {name}")))
    }

    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        let k = self.column(name)?;
        self.rows.iter().map(|r| parse_f64(&r[k])).collect()
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k}={v}")?;
        }
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(&self.columns).map_err(|e| format_err(e.to_string()))?;
        for row in &self.rows {
            csv.write_record(row).map_err(|e| format_err(e.to_string()))?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = Vec::new();
        let mut body_start = 0;
        for line in text.lines() {
            let Some(rest) = line.strip_prefix('#') else { break };
            let (k, v) = rest.trim().split_once('=').ok_or_else(|| format_err(format!("bad metadata line {line:?}")))?;
            meta.push((k.trim().to_string(), v.trim().to_string()));
            body_start += line.len() + 1;
        }
        let body = text.get(body_start.min(text.len())..).unwrap_or("");
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let columns = reader.headers().map_err(|e| format_err(e.to_string()))?.iter().map(str::to_string).collect();
        let rows =
            reader.records().map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()).map_err(|e| format_err(e.to_string()))).collect::<Result<_>>()?;
        Ok(Self { meta, columns, rows })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

fn index_columns(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn matrix_table(m: &DMatrix<f64>) -> Table {
    let mut t = Table::new(&index_columns("c", m.ncols()));
    for i in 0..m.nrows() {
        let row: Vec<f64> = m.row(i).iter().copied().collect();
        t.push_floats(&row);
    }
    t
}

pub fn matrix_from_table(t: &Table) -> Result<DMatrix<f64>> {
    let cols = t.columns.len();
    let values: Vec<f64> = t.rows.iter().flatten().map(|s| parse_f64(s)).collect::<Result<_>>()?;
    if cols == 0 || values.len() != t.rows.len() * cols {
        return Err(format_err("ragged matrix table"));
    }
    Ok(DMatrix::from_row_slice(t.rows.len(), cols, &values))
}

pub fn samples_table(s: &SampleSet) -> Table {
    let mut t = matrix_table(&s.data);
    t.columns = index_columns("x", s.n());
    t
}

pub fn samples_from_table(t: &Table) -> Result<SampleSet> {
    SampleSet::new(matrix_from_table(t)?)
}

/// Text document with the scalars, both spectra and the eigenbasis rows.
pub fn map_solution_to_text(sol: &MapSolution) -> String {
    let mut s = String::new();
    let join = |v: &mut dyn Iterator<Item = f64>| v.map(fmt_f64).collect::<Vec<_>>().join(" ");
    let penalty = match sol.penalty {
        Penalty::L2 => "L2",
        Penalty::L1 => "L1",
    };
    writeln!(s, "map-solution").ok();
    writeln!(s, "n {}", sol.n()).ok();
    writeln!(s, "penalty {penalty}").ok();
    writeln!(s, "alpha {}", fmt_f64(sol.alpha)).ok();
    writeln!(s, "gamma {}", fmt_f64(sol.gamma)).ok();
    writeln!(s, "mu_star {}", fmt_f64(sol.mu_star)).ok();
    writeln!(s, "j_star {}", join(&mut sol.j_star.iter().copied())).ok();
    writeln!(s, "c_emp {}", join(&mut sol.c_emp.iter().copied())).ok();
    writeln!(s, "basis").ok();
    for i in 0..sol.n() {
        writeln!(s, "{}", join(&mut sol.basis.row(i).iter().copied())).ok();
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Filter<std::str::Lines<'a>, fn(&&str) -> bool>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        fn keep(l: &&str) -> bool {
            !l.trim().is_empty() && !l.trim_start().starts_with('#')
        }
        Self { inner: text.lines().filter(keep as fn(&&str) -> bool) }
    }

    fn next_line(&mut self) -> Result<&'a str> {
        self.inner.next().ok_or_else(|| format_err("unexpected end of document"))
    }

    /// Next line must start with `key`; returns the remainder.
    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line()?;
        let mut parts = line.splitn(2, char::is_whitespace);
        if parts.next() != Some(key) {
            return Err(format_err(format!("expected {key:?}, found {line:?}")));
        }
        Ok(parts.next().unwrap_or("").trim())
    }

    fn floats(line: &str) -> Result<Vec<f64>> {
        line.split_whitespace().map(parse_f64).collect()
    }
}

pub fn map_solution_from_text(text: &str) -> Result<MapSolution> {
    let mut lines = Lines::new(text);
    if lines.next_line()?.trim() != "map-solution" {
        return Err(format_err("not a map-solution document"));
    }
    let n = parse_usize(lines.keyed("n")?)?;
    let penalty = match lines.keyed("penalty")? {
        "L2" => Penalty::L2,
        "L1" => Penalty::L1,
        other => return Err(format_err(format!("unknown penalty {other}"))),
    };
    let alpha = parse_f64(lines.keyed("alpha")?)?;
    let gamma = parse_f64(lines.keyed("gamma")?)?;
    let mu_star = parse_f64(lines.keyed("mu_star")?)?;
    let j_star = Lines::floats(lines.keyed("j_star")?)?;
    let c_emp = Lines::floats(lines.keyed("c_emp")?)?;
    lines.keyed("basis")?;
    let mut basis = Vec::with_capacity(n * n);
    for _ in 0..n {
        let row = Lines::floats(lines.next_line()?)?;
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: row.len() });
        }
        basis.extend(row);
    }
    if j_star.len() != n || c_emp.len() != n {
        return Err(format_err("spectrum lengths differ from n"));
    }
    let basis = DMatrix::from_row_slice(n, n, &basis);
    let interaction = InteractionMatrix::from_spectrum(j_star.clone(), basis.clone())?;
    Ok(MapSolution { j_star, c_emp, mu_star, basis, interaction, gamma, alpha, penalty })
}

/// `potts-params`, `n`, `q`, one line of fields per site, then each edge as
/// `edge i j` followed by `q` rows of its block.
pub fn potts_params_to_text(p: &PottsParams) -> String {
    let q = p.q();
    let mut s = String::new();
    writeln!(s, "potts-params").ok();
    writeln!(s, "n {}", p.n()).ok();
    writeln!(s, "q {q}").ok();
    writeln!(s, "fields").ok();
    for h in p.fields().chunks_exact(q) {
        writeln!(s, "{}", h.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(" ")).ok();
    }
    writeln!(s, "edges {}", p.edges().len()).ok();
    for (e, &(i, j)) in p.edges().iter().enumerate() {
        writeln!(s, "edge {i} {j}").ok();
        for row in p.block(e).chunks_exact(q) {
            writeln!(s, "{}", row.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(" ")).ok();
        }
    }
    s
}

pub fn potts_params_from_text(text: &str) -> Result<PottsParams> {
    let mut lines = Lines::new(text);
    if lines.next_line()?.trim() != "potts-params" {
        return Err(format_err("not a potts-params document"));
    }
    let n = parse_usize(lines.keyed("n")?)?;
    let q = parse_usize(lines.keyed("q")?)?;
    lines.keyed("fields")?;
    let mut h = Vec::with_capacity(n * q);
    for _ in 0..n {
        h.extend(Lines::floats(lines.next_line()?)?);
    }
    let m = parse_usize(lines.keyed("edges")?)?;
    let mut edges = Vec::with_capacity(m);
    let mut blocks = Vec::with_capacity(m * q * q);
    for _ in 0..m {
        let ij: Vec<usize> = lines.keyed("edge")?.split_whitespace().map(parse_usize).collect::<Result<_>>()?;
        if ij.len() != 2 {
            return Err(format_err("edge line needs two sites"));
        }
        edges.push((ij[0], ij[1]));
        for _ in 0..q {
            blocks.extend(Lines::floats(lines.next_line()?)?);
        }
    }
    PottsParams::new(n, q, h, edges, blocks)
}

pub fn potts_samples_table(s: &PottsSampleSet) -> Table {
    let mut t = Table::new(&index_columns("x", s.n)).meta("q", s.q).meta("seed", s.seed).meta("burn_in", s.burn_in).meta("thinning", s.thinning);
    t.rows = s.iter().map(|x| x.iter().map(|v| v.to_string()).collect()).collect();
    t
}

pub fn potts_samples_from_table(t: &Table) -> Result<PottsSampleSet> {
    let meta = |k: &str| t.meta_value(k).ok_or_else(|| format_err(format!("missing metadata {k}"))).and_then(parse_usize);
    let n = t.columns.len();
    let configs: Vec<u8> =
        t.rows.iter().flatten().map(|v| v.trim().parse::<u8>().map_err(|_| format_err(format!("bad state {v:?}")))).collect::<Result<_>>()?;
    let mut s = PottsSampleSet::new(n, meta("q")?, configs)?;
    s.seed = meta("seed")? as u64;
    s.burn_in = meta("burn_in")?;
    s.thinning = meta("thinning")?;
    Ok(s)
}

pub const SCAN_COLUMNS: [&str; 6] = ["gamma", "l_train", "l_test", "l_gen", "mu_star", "frobenius_sq"];

pub fn scan_table(rows: &[ScanRow], alpha: f64) -> Table {
    let mut t = Table::new(&SCAN_COLUMNS).meta("alpha", fmt_f64(alpha));
    for r in rows {
        let l = &r.likelihoods;
        t.push_floats(&[l.gamma, l.l_train, l.l_test, l.l_gen, r.mu_star, r.frobenius_sq]);
    }
    t
}

pub fn scan_rows_from_table(t: &Table) -> Result<Vec<ScanRow>> {
    let alpha = parse_f64(t.meta_value("alpha").ok_or_else(|| format_err("missing metadata alpha"))?)?;
    let cols: Vec<Vec<f64>> = SCAN_COLUMNS.iter().map(|c| t.floats(c)).collect::<Result<_>>()?;
    Ok((0..t.rows.len())
        .map(|k| ScanRow {
            likelihoods: LikelihoodTriple { gamma: cols[0][k], l_train: cols[1][k], l_test: cols[2][k], l_gen: cols[3][k], alpha },
            mu_star: cols[4][k],
            frobenius_sq: cols[5][k],
        })
        .collect())
}

pub fn l1_scan_table(scan: &L1Scan, alpha: f64) -> Table {
    let mut t = Table::new(&["gamma1", "l_train", "l_test", "l_gen", "mu_star", "frobenius_sq", "support"]).meta("alpha", fmt_f64(alpha));
    for (k, l) in scan.rows.iter().enumerate() {
        let mut row: Vec<String> = [l.gamma, l.l_train, l.l_test, l.l_gen, scan.mu_star[k], scan.frobenius_sq[k]].iter().map(|&x| fmt_f64(x)).collect();
        row.push(scan.support[k].to_string());
        t.rows.push(row);
    }
    t
}

pub const TRACE_COLUMNS: [&str; 5] = ["step", "train_energy", "test_energy", "distance", "acceptance"];

pub fn trace_table(trace: &PosteriorTrace) -> Table {
    let mut t = Table::new(&TRACE_COLUMNS)
        .meta("beta", fmt_f64(trace.beta))
        .meta("map_train_energy", fmt_f64(trace.map_train_energy))
        .meta("map_test_energy", fmt_f64(trace.map_test_energy));
    for r in &trace.records {
        let mut row = vec![r.step.to_string()];
        row.extend([r.train_energy, r.test_energy, r.distance, r.acceptance].iter().map(|&x| fmt_f64(x)));
        t.rows.push(row);
    }
    t
}

pub fn trace_records_from_table(t: &Table) -> Result<Vec<TraceRecord>> {
    let step = t.column("step")?;
    let cols: Vec<Vec<f64>> = TRACE_COLUMNS[1..].iter().map(|c| t.floats(c)).collect::<Result<_>>()?;
    t.rows
        .iter()
        .enumerate()
        .map(|(k, row)| {
            Ok(TraceRecord { step: parse_usize(&row[step])?, train_energy: cols[0][k], test_energy: cols[1][k], distance: cols[2][k], acceptance: cols[3][k] })
        })
        .collect()
}

/// Ordered `key = value` record, one per experiment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    pub entries: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn push_f64(&mut self, key: impl Into<String>, value: Option<f64>) {
        let v = value.map(fmt_f64).unwrap_or_else(|| "none".into());
        self.entries.push((key.into(), v));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let entries = Lines::new(text)
            .inner
            .map(|l| l.split_once('=').map(|(k, v)| (k.trim().to_string(), v.trim().to_string())).ok_or_else(|| format_err(format!("bad summary line {l:?}"))))
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }
}
