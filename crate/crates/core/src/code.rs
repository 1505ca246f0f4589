//! Quasi-cyclic CSS code pairs built from circulant exponent matrices.

use std::fmt;
use std::path::Path;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::gf2::{self, Girth, SparseBinaryMatrix};

/// `J x L` array of circulant shifts, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExponentMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<i64>,
}

impl ExponentMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<i64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::invalid(format!(
                "exponent matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("exponent matrix rows have unequal lengths"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Number of block rows (`J`).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of block columns (`L`).
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, j: usize, l: usize) -> i64 {
        self.entries[j * self.cols + l]
    }

    pub fn row(&self, j: usize) -> &[i64] {
        &self.entries[j * self.cols..(j + 1) * self.cols]
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn reduced(&self, circulant: usize) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|&e| gf2::reduce_shift(e, circulant) as i64)
                .collect(),
        }
    }

    /// Expands every entry into a `circulant x circulant` CPM.
    pub fn expand(&self, circulant: usize) -> Result<SparseBinaryMatrix> {
        if circulant == 0 {
            return Err(Error::invalid("circulant size must be at least 1"));
        }
        let n = circulant * self.cols;
        let mut supports = Vec::with_capacity(self.rows * circulant);
        for j in 0..self.rows {
            let shifts: Vec<usize> = self
                .row(j)
                .iter()
                .map(|&e| gf2::reduce_shift(e, circulant))
                .collect();
            for i in 0..circulant {
                supports.push(
                    shifts
                        .iter()
                        .enumerate()
                        .map(|(l, &s)| l * circulant + (i + s) % circulant)
                        .collect(),
                );
            }
        }
        SparseBinaryMatrix::from_rows(self.rows * circulant, n, supports)
    }
}

/// The `(E_X, E_Z)` exponent matrices of a quantum QC-LDPC code.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExponentPair {
    pub x: ExponentMatrix,
    pub z: ExponentMatrix,
}

impl ExponentPair {
    pub fn new(x: ExponentMatrix, z: ExponentMatrix) -> Result<Self> {
        if x.rows != z.rows || x.cols != z.cols {
            return Err(Error::invalid(format!(
                "E_X is {}x{} but E_Z is {}x{}",
                x.rows, x.cols, z.rows, z.cols
            )));
        }
        Ok(Self { x, z })
    }

    pub fn j(&self) -> usize {
        self.x.rows
    }

    pub fn l(&self) -> usize {
        self.x.cols
    }

    /// Exchanges the roles of the two matrices.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.z.clone(),
            z: self.x.clone(),
        }
    }

    /// Serializes in the exponent-pair text format read by [`parse_pair`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.j(), self.l());
        let write = |m: &ExponentMatrix, out: &mut String| {
            for j in 0..m.rows {
                let line: Vec<String> = m.row(j).iter().map(i64::to_string).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        };
        write(&self.x, &mut out);
        out.push('\n');
        write(&self.z, &mut out);
        out
    }
}

/// The `J = 3`, `L = 8` pair with power-of-two shifts.
pub fn builtin_pair_j3_l8() -> ExponentPair {
    const X_POWERS: [[u32; 8]; 3] = [
        [0, 1, 2, 3, 4, 5, 6, 7],
        [3, 0, 1, 2, 7, 4, 5, 6],
        [2, 3, 0, 1, 6, 7, 4, 5],
    ];
    const Z_POWERS: [[u32; 8]; 3] = [
        [4, 7, 6, 5, 0, 3, 2, 1],
        [5, 4, 7, 6, 1, 0, 3, 2],
        [6, 5, 4, 7, 2, 1, 0, 3],
    ];
    let x = X_POWERS.iter().flatten().map(|&k| 1i64 << k).collect();
    let z = Z_POWERS.iter().flatten().map(|&k| -(1i64 << k)).collect();
    ExponentPair {
        x: ExponentMatrix::new(3, 8, x).expect("static shape"),
        z: ExponentMatrix::new(3, 8, z).expect("static shape"),
    }
}

pub fn load_pair(path: impl AsRef<Path>) -> Result<ExponentPair> {
    let text = std::fs::read_to_string(path)?;
    parse_pair(&text)
}

/// Parses the exponent-pair text format:
///
/// ```text
/// # comment
/// J L
/// <J lines of L integers: E_X>
///
/// <J lines of L integers: E_Z>
/// ```
pub fn parse_pair(text: &str) -> Result<ExponentPair> {
    struct Line<'a> {
        number: usize,
        text: &'a str,
    }

    // non-comment lines, grouped by blank separators
    let mut header: Option<Line> = None;
    let mut groups: Vec<Vec<Line>> = Vec::new();
    let mut open_group = false;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        last_line = number;
        let trimmed = raw.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        if trimmed.is_empty() {
            open_group = false;
            continue;
        }
        let line = Line { number, text: raw };
        if header.is_none() {
            header = Some(line);
            continue;
        }
        if !open_group {
            groups.push(Vec::new());
            open_group = true;
        }
        groups.last_mut().expect("group opened").push(line);
    }

    fn parse_ints(line: &Line) -> Result<Vec<i64>> {
        let mut values = Vec::new();
        let mut offset = 0;
        for token in line.text.split_whitespace() {
            let start = offset + line.text[offset..].find(token).expect("token in line");
            offset = start + token.len();
            let value = token.parse::<i64>().map_err(|_| Error::Parse {
                line: line.number,
                column: start + 1,
                message: format!("expected an integer, found `{token}`"),
            })?;
            values.push(value);
        }
        Ok(values)
    }

    let header = header.ok_or_else(|| Error::Parse {
        line: last_line.max(1),
        column: 1,
        message: "missing `J L` header".into(),
    })?;
    let dims = parse_ints(&header)?;
    let (j, l) = match dims[..] {
        [j, l] if j > 0 && l > 0 => (j as usize, l as usize),
        _ => {
            return Err(Error::Parse {
                line: header.number,
                column: 1,
                message: "header must be two positive integers `J L`".into(),
            })
        }
    };

    if groups.len() != 2 {
        let (line, message) = match groups.get(2) {
            Some(extra) => (extra[0].number, "unexpected third matrix block".to_string()),
            None => (
                last_line,
                format!("expected two matrix blocks, found {}", groups.len()),
            ),
        };
        return Err(Error::Parse {
            line,
            column: 1,
            message,
        });
    }

    let mut matrices = Vec::with_capacity(2);
    for (name, group) in ["E_X", "E_Z"].iter().zip(&groups) {
        if group.len() != j {
            let at = group.get(j).unwrap_or(group.last().expect("non-empty group"));
            return Err(Error::Parse {
                line: at.number,
                column: 1,
                message: format!("{name} has {} rows but header declares J = {j}", group.len()),
            });
        }
        let mut entries = Vec::with_capacity(j * l);
        for line in group {
            let row = parse_ints(line)?;
            if row.len() != l {
                return Err(Error::Parse {
                    line: line.number,
                    column: 1,
                    message: format!("{name} row has {} entries but L = {l}", row.len()),
                });
            }
            entries.extend(row);
        }
        matrices.push(ExponentMatrix::new(j, l, entries)?);
    }
    let z = matrices.pop().expect("two matrices");
    let x = matrices.pop().expect("two matrices");
    ExponentPair::new(x, z)
}

/// A validated quantum QC-LDPC code.
///
/// `h_x` and `h_z` are `(J*P) x (L*P)`, every column has weight `J`, every
/// row weight `L`, and `h_x * h_z^T = 0`.
#[derive(Clone, Debug)]
pub struct QuantumQcCode {
    pair: ExponentPair,
    circulant: usize,
    h_x: SparseBinaryMatrix,
    h_z: SparseBinaryMatrix,
}

/// Raw structural checks of an expanded pair, before accepting it as a code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairInspection {
    pub circulant: usize,
    /// First block `(j, j')` with a nonzero product, if any.
    pub first_nonorthogonal_block: Option<(usize, usize)>,
    pub weights_ok: bool,
}

impl PairInspection {
    pub fn orthogonal(&self) -> bool {
        self.first_nonorthogonal_block.is_none()
    }
}

fn expand_pair(pair: &ExponentPair, circulant: usize) -> Result<(SparseBinaryMatrix, SparseBinaryMatrix)> {
    Ok((pair.x.expand(circulant)?, pair.z.expand(circulant)?))
}

fn inspect_expanded(
    h_x: &SparseBinaryMatrix,
    h_z: &SparseBinaryMatrix,
    j: usize,
    l: usize,
    circulant: usize,
) -> Result<PairInspection> {
    let product = gf2::mat_mul_mod2(h_x, &h_z.transpose())?;
    let first_nonorthogonal_block =
        (0..product.rows()).find_map(|r| product.row(r).first().map(|&c| (r / circulant, c / circulant)));
    let weights_ok = [h_x, h_z]
        .iter()
        .all(|h| h.col_weights().iter().all(|&w| w == j) && h.row_weights().iter().all(|&w| w == l));
    Ok(PairInspection {
        circulant,
        first_nonorthogonal_block,
        weights_ok,
    })
}

/// Expands `pair` at circulant size `circulant` and reports orthogonality and
/// weights without rejecting the result.
pub fn inspect_pair(pair: &ExponentPair, circulant: usize) -> Result<PairInspection> {
    let (h_x, h_z) = expand_pair(pair, circulant)?;
    inspect_expanded(&h_x, &h_z, pair.j(), pair.l(), circulant)
}

pub fn build_code(pair: &ExponentPair, circulant: usize) -> Result<QuantumQcCode> {
    if circulant < 2 {
        return Err(Error::invalid("circulant size P must be at least 2"));
    }
    let pair = ExponentPair::new(pair.x.clone(), pair.z.clone())?;
    let (h_x, h_z) = expand_pair(&pair, circulant)?;
    let check = inspect_expanded(&h_x, &h_z, pair.j(), pair.l(), circulant)?;
    if let Some((j, jj)) = check.first_nonorthogonal_block {
        return Err(Error::Validation(format!(
            "H_X * H_Z^T is nonzero at block ({j}, {jj}) for P = {circulant}"
        )));
    }
    if !check.weights_ok {
        return Err(Error::Validation(format!(
            "column weight {} / row weight {} violated at P = {circulant}",
            pair.j(),
            pair.l()
        )));
    }
    Ok(QuantumQcCode {
        pair,
        circulant,
        h_x,
        h_z,
    })
}

impl QuantumQcCode {
    pub fn pair(&self) -> &ExponentPair {
        &self.pair
    }

    /// Circulant size `P`.
    pub fn circulant(&self) -> usize {
        self.circulant
    }

    pub fn j(&self) -> usize {
        self.pair.j()
    }

    pub fn l(&self) -> usize {
        self.pair.l()
    }

    /// Code length `n = P * L`.
    pub fn n(&self) -> usize {
        self.circulant * self.pair.l()
    }

    pub fn h_x(&self) -> &SparseBinaryMatrix {
        &self.h_x
    }

    pub fn h_z(&self) -> &SparseBinaryMatrix {
        &self.h_z
    }

    /// One variable node per circulant block: enough BFS roots for the girth
    /// of a quasi-cyclic Tanner graph.
    fn block_roots(&self) -> Vec<usize> {
        (0..self.l()).map(|l| l * self.circulant).collect()
    }

    pub fn girth_x(&self) -> Girth {
        gf2::girth_from_roots(&self.h_x, &self.block_roots())
    }

    pub fn girth_z(&self) -> Girth {
        gf2::girth_from_roots(&self.h_z, &self.block_roots())
    }
}

/// Orthogonality, weights and girth of one circulant size in a scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanRow {
    pub circulant: usize,
    pub n: usize,
    pub orthogonal: bool,
    pub weights_ok: bool,
    pub girth_x: Girth,
    pub girth_z: Girth,
}

impl ScanRow {
    /// A valid code whose two Tanner graphs both have girth 6.
    pub fn is_girth_six(&self) -> bool {
        self.orthogonal
            && self.weights_ok
            && self.girth_x == Girth::Finite(6)
            && self.girth_z == Girth::Finite(6)
    }
}

/// Expands `pair` at every circulant size in `sizes` and records each
/// expansion's structure, without rejecting invalid ones.
pub fn scan_circulants(pair: &ExponentPair, sizes: impl IntoIterator<Item = usize>) -> Result<Vec<ScanRow>> {
    sizes
        .into_iter()
        .map(|p| {
            let (h_x, h_z) = expand_pair(pair, p)?;
            let check = inspect_expanded(&h_x, &h_z, pair.j(), pair.l(), p)?;
            let roots: Vec<usize> = (0..pair.l()).map(|l| l * p).collect();
            Ok(ScanRow {
                circulant: p,
                n: p * pair.l(),
                orthogonal: check.orthogonal(),
                weights_ok: check.weights_ok,
                girth_x: gf2::girth_from_roots(&h_x, &roots),
                girth_z: gf2::girth_from_roots(&h_z, &roots),
            })
        })
        .collect()
}

/// `1 - 2J/L`.
pub fn design_rate(j: usize, l: usize) -> Result<Ratio<i64>> {
    if l == 0 {
        return Err(Error::invalid("L must be positive"));
    }
    Ok(Ratio::from_integer(1) - Ratio::new(2 * j as i64, l as i64))
}

/// `1 - (rank H_X + rank H_Z) / n`.
pub fn measured_rate(code: &QuantumQcCode) -> Ratio<i64> {
    rate_from_ranks(gf2::gf2_rank(code.h_x()), gf2::gf2_rank(code.h_z()), code.n())
}

fn rate_from_ranks(rank_x: usize, rank_z: usize, n: usize) -> Ratio<i64> {
    Ratio::from_integer(1) - Ratio::new((rank_x + rank_z) as i64, n as i64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeReport {
    pub j: usize,
    pub l: usize,
    pub circulant: usize,
    pub n: usize,
    pub rank_x: usize,
    pub rank_z: usize,
    pub girth_x: Girth,
    pub girth_z: Girth,
    pub measured_rate: Ratio<i64>,
    pub design_rate: Ratio<i64>,
}

pub fn code_report(code: &QuantumQcCode) -> CodeReport {
    let rank_x = gf2::gf2_rank(code.h_x());
    let rank_z = gf2::gf2_rank(code.h_z());
    CodeReport {
        j: code.j(),
        l: code.l(),
        circulant: code.circulant(),
        n: code.n(),
        rank_x,
        rank_z,
        girth_x: code.girth_x(),
        girth_z: code.girth_z(),
        measured_rate: rate_from_ranks(rank_x, rank_z, code.n()),
        design_rate: design_rate(code.j(), code.l()).expect("validated L > 0"),
    }
}

impl fmt::Display for CodeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "J             {}", self.j)?;
        writeln!(f, "L             {}", self.l)?;
        writeln!(f, "P             {}", self.circulant)?;
        writeln!(f, "n             {}", self.n)?;
        writeln!(f, "rank H_X      {}", self.rank_x)?;
        writeln!(f, "rank H_Z      {}", self.rank_z)?;
        writeln!(f, "girth H_X     {}", self.girth_x)?;
        writeln!(f, "girth H_Z     {}", self.girth_z)?;
        writeln!(
            f,
            "measured rate {} ({:.6})",
            self.measured_rate,
            ratio_to_f64(self.measured_rate)
        )?;
        write!(
            f,
            "design rate   {} ({:.6})",
            self.design_rate,
            ratio_to_f64(self.design_rate)
        )
    }
}

pub fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
