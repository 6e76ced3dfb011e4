//! CSV output. Floats are written with 17 significant digits so every value
//! round-trips exactly.

use std::io::Write;

use subgeo_core::verify::CheckRow;

pub fn float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_owned()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        format!("{x:.16e}")
    }
}

pub type CsvWriter<W> = csv::Writer<W>;

pub fn writer<W: Write>(out: W) -> CsvWriter<W> {
    csv::WriterBuilder::new().from_writer(out)
}

pub const CHECK_HEADER: [&str; 10] = [
    "check_id", "chain_id", "param", "pair", "lhs", "tail", "rhs", "slack", "terms", "pass",
];

pub fn write_check<W: Write>(
    w: &mut CsvWriter<W>,
    chain_id: &str,
    param: &str,
    row: &CheckRow,
) -> csv::Result<()> {
    w.write_record([
        row.check_id,
        chain_id,
        param,
        &row.pair,
        &float(row.lhs),
        &float(row.tail),
        &float(row.rhs),
        &float(row.slack),
        &row.terms.to_string(),
        if row.pass { "true" } else { "false" },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 88.0, 1e-300, -2.5e17, f64::MIN_POSITIVE] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(float(2.5), "2.5000000000000000e0");
    }
}
