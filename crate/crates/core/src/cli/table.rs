//! Result tables in CSV form.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const HEADER: [&str; 9] = [
    "algorithm",
    "T",
    "trials",
    "mean_excess",
    "std_error",
    "theoretical_rhs",
    "satisfied",
    "k_dagger",
    "gradients_consumed",
];

/// One row per `(algorithm, budget)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub algorithm: String,
    pub budget: usize,
    pub trials: usize,
    pub mean_excess: f64,
    pub std_error: f64,
    pub theoretical_rhs: f64,
    pub satisfied: bool,
    pub k_dagger: usize,
    pub gradients_consumed: usize,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::Table(e.to_string())
}

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.algorithm.clone(),
            r.budget.to_string(),
            r.trials.to_string(),
            format_float(r.mean_excess),
            format_float(r.std_error),
            format_float(r.theoretical_rhs),
            r.satisfied.to_string(),
            r.k_dagger.to_string(),
            r.gradients_consumed.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Table(e.to_string()))?;
    Ok(())
}

pub fn emit(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, line: u64) -> Result<T> {
    let raw = record.get(idx).unwrap_or("");
    raw.parse().map_err(|_| {
        Error::Table(format!("line {line}: column {} has invalid value `{raw}`", HEADER[idx]))
    })
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(csv_error)?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::Table(format!(
            "expected header `{}`, got `{}`",
            HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push(ResultRow {
            algorithm: field(&record, 0, line)?,
            budget: field(&record, 1, line)?,
            trials: field(&record, 2, line)?,
            mean_excess: field(&record, 3, line)?,
            std_error: field(&record, 4, line)?,
            theoretical_rhs: field(&record, 5, line)?,
            satisfied: field(&record, 6, line)?,
            k_dagger: field(&record, 7, line)?,
            gradients_consumed: field(&record, 8, line)?,
        });
    }
    Ok(rows)
}

pub fn parse(text: &str) -> Result<Vec<ResultRow>> {
    read_rows(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(mean: f64) -> ResultRow {
        ResultRow {
            algorithm: "fasa".into(),
            budget: 64,
            trials: 100,
            mean_excess: mean,
            std_error: 1.0 / 3.0,
            theoretical_rhs: f64::INFINITY,
            satisfied: true,
            k_dagger: 3,
            gradients_consumed: 60,
        }
    }

    #[test]
    fn header_and_line_endings() {
        let text = emit(&[row(0.1)]);
        assert!(text.starts_with(
            "algorithm,T,trials,mean_excess,std_error,theoretical_rhs,satisfied,k_dagger,gradients_consumed\n"
        ));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("1.0000000000000001e-1"));
    }

    #[test]
    fn round_trip_special_values() {
        let rows = vec![row(0.0), row(f64::MIN_POSITIVE), row(f64::MAX), row(-1e-300)];
        assert_eq!(parse(&emit(&rows)).unwrap(), rows);
    }

    #[test]
    fn bad_input_is_rejected() {
        assert!(parse("a,b\n1,2\n").is_err());
        let text = emit(&[row(1.0)]).replace("true", "maybe");
        assert!(parse(&text).is_err());
    }

    proptest! {
        #[test]
        fn emit_parse_round_trips(
            means in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 1..8),
            budget in 1usize..1_000_000,
            satisfied in any::<bool>(),
        ) {
            let rows: Vec<ResultRow> = means
                .iter()
                .map(|&m| ResultRow { budget, satisfied, std_error: m.abs(), ..row(m) })
                .collect();
            prop_assert_eq!(parse(&emit(&rows)).unwrap(), rows);
        }
    }
}
