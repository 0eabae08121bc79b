//! Fixed-schema CSV records.

use crate::error::{HarnessError, Result};
use std::fs::File;
use std::io::Write;
use std::path::Path;

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros dropped,
/// scientific notation outside `1e-5 ≤ |x| < 1e17`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let fixed = format!("{x:.*}", (16 - exp) as usize);
        trim_zeros(&fixed).to_string()
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn parse_float(s: &str, column: &str, row: usize) -> Result<f64> {
    s.trim().parse().map_err(|_| HarnessError::NonNumericColumn {
        column: column.to_string(),
        row,
    })
}

fn parse_int<T: std::str::FromStr>(s: &str, column: &str, row: usize) -> Result<T> {
    s.trim().parse().map_err(|_| HarnessError::NonNumericColumn {
        column: column.to_string(),
        row,
    })
}

pub trait CsvRecord: Sized {
    const HEADER: &'static [&'static str];
    fn to_fields(&self) -> Vec<String>;
    fn from_fields(fields: &[String], row: usize) -> Result<Self>;
}

pub fn write_csv<R: CsvRecord>(records: &[R], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    let io = |e: csv::Error| HarnessError::io(path, e.into());
    w.write_record(R::HEADER).map_err(io)?;
    for r in records {
        w.write_record(r.to_fields()).map_err(io)?;
    }
    let mut inner = w.into_inner().map_err(|e| HarnessError::io(path, e.into_error()))?;
    inner.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_csv<R: CsvRecord>(path: &Path) -> Result<Vec<R>> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut rd = csv::Reader::from_reader(file);
    let parse = |e: csv::Error| HarnessError::Parse {
        what: path.display().to_string(),
        reason: e.to_string(),
    };
    let header = rd.headers().map_err(parse)?.clone();
    if header.iter().ne(R::HEADER.iter().copied()) {
        return Err(HarnessError::Parse {
            what: path.display().to_string(),
            reason: format!("expected header {:?}", R::HEADER),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(parse)?;
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        out.push(R::from_fields(&fields, i + 1)?);
    }
    Ok(out)
}

/// rounds.csv
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRow {
    pub t: u64,
    pub chosen_arm: usize,
    pub reward: f64,
    pub oracle_arm: usize,
    pub oracle_reward: f64,
    pub inst_regret: f64,
    pub cum_regret: f64,
}

impl From<&fedband::RoundRecord> for RoundRow {
    fn from(r: &fedband::RoundRecord) -> Self {
        Self {
            t: r.t,
            chosen_arm: r.chosen_arm,
            reward: r.reward,
            oracle_arm: r.oracle_arm,
            oracle_reward: r.oracle_reward,
            inst_regret: r.inst_regret,
            cum_regret: r.cum_regret,
        }
    }
}

impl CsvRecord for RoundRow {
    const HEADER: &'static [&'static str] = &[
        "t",
        "chosen_arm",
        "reward",
        "oracle_arm",
        "oracle_reward",
        "inst_regret",
        "cum_regret",
    ];

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.t.to_string(),
            self.chosen_arm.to_string(),
            format_float(self.reward),
            self.oracle_arm.to_string(),
            format_float(self.oracle_reward),
            format_float(self.inst_regret),
            format_float(self.cum_regret),
        ]
    }

    fn from_fields(f: &[String], row: usize) -> Result<Self> {
        check_width::<Self>(f, row)?;
        Ok(Self {
            t: parse_int(&f[0], "t", row)?,
            chosen_arm: parse_int(&f[1], "chosen_arm", row)?,
            reward: parse_float(&f[2], "reward", row)?,
            oracle_arm: parse_int(&f[3], "oracle_arm", row)?,
            oracle_reward: parse_float(&f[4], "oracle_reward", row)?,
            inst_regret: parse_float(&f[5], "inst_regret", row)?,
            cum_regret: parse_float(&f[6], "cum_regret", row)?,
        })
    }
}

/// selection.csv
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionRow {
    pub arm: usize,
    pub pulls: u64,
    pub kl_oracle: f64,
}

impl CsvRecord for SelectionRow {
    const HEADER: &'static [&'static str] = &["arm", "pulls", "kl_oracle"];

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.arm.to_string(),
            self.pulls.to_string(),
            format_float(self.kl_oracle),
        ]
    }

    fn from_fields(f: &[String], row: usize) -> Result<Self> {
        check_width::<Self>(f, row)?;
        Ok(Self {
            arm: parse_int(&f[0], "arm", row)?,
            pulls: parse_int(&f[1], "pulls", row)?,
            kl_oracle: parse_float(&f[2], "kl_oracle", row)?,
        })
    }
}

/// kl_table.csv
#[derive(Debug, Clone, PartialEq)]
pub struct KlRow {
    pub rank: usize,
    pub arm: usize,
    pub kl: f64,
}

impl CsvRecord for KlRow {
    const HEADER: &'static [&'static str] = &["rank", "arm", "kl"];

    fn to_fields(&self) -> Vec<String> {
        vec![self.rank.to_string(), self.arm.to_string(), format_float(self.kl)]
    }

    fn from_fields(f: &[String], row: usize) -> Result<Self> {
        check_width::<Self>(f, row)?;
        Ok(Self {
            rank: parse_int(&f[0], "rank", row)?,
            arm: parse_int(&f[1], "arm", row)?,
            kl: parse_float(&f[2], "kl", row)?,
        })
    }
}

/// loss.csv
#[derive(Debug, Clone, PartialEq)]
pub struct LossRow {
    pub round: usize,
    pub arm_joined: usize,
    pub fl_loss: f64,
}

impl CsvRecord for LossRow {
    const HEADER: &'static [&'static str] = &["round", "arm_joined", "fl_loss"];

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.round.to_string(),
            self.arm_joined.to_string(),
            format_float(self.fl_loss),
        ]
    }

    fn from_fields(f: &[String], row: usize) -> Result<Self> {
        check_width::<Self>(f, row)?;
        Ok(Self {
            round: parse_int(&f[0], "round", row)?,
            arm_joined: parse_int(&f[1], "arm_joined", row)?,
            fl_loss: parse_float(&f[2], "fl_loss", row)?,
        })
    }
}

/// walkthrough.csv
#[derive(Debug, Clone, PartialEq)]
pub struct WalkthroughRow {
    pub step: usize,
    pub candidate: usize,
    pub loss: f64,
    pub switch_cost: f64,
    pub decision: String,
}

impl CsvRecord for WalkthroughRow {
    const HEADER: &'static [&'static str] = &["step", "candidate", "loss", "switch_cost", "decision"];

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.step.to_string(),
            self.candidate.to_string(),
            format_float(self.loss),
            format_float(self.switch_cost),
            self.decision.clone(),
        ]
    }

    fn from_fields(f: &[String], row: usize) -> Result<Self> {
        check_width::<Self>(f, row)?;
        Ok(Self {
            step: parse_int(&f[0], "step", row)?,
            candidate: parse_int(&f[1], "candidate", row)?,
            loss: parse_float(&f[2], "loss", row)?,
            switch_cost: parse_float(&f[3], "switch_cost", row)?,
            decision: f[4].clone(),
        })
    }
}

fn check_width<R: CsvRecord>(f: &[String], row: usize) -> Result<()> {
    if f.len() == R::HEADER.len() {
        Ok(())
    } else {
        Err(HarnessError::Parse {
            what: format!("row {row}"),
            reason: format!("expected {} fields, found {}", R::HEADER.len(), f.len()),
        })
    }
}
