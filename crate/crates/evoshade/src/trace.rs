//! CSV output for simulation traces.

use std::io;

use evoshade_core::ConvergenceTrace;

pub const CSV_HEADER: [&str; 4] = [
    "generation",
    "chosen_best_distance",
    "population_min_distance",
    "chosen_expression",
];

/// Writes one row per generation under [`CSV_HEADER`]. Distances use the
/// shortest decimal that round-trips.
pub fn write_csv<W: io::Write>(trace: &ConvergenceTrace, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &trace.rows {
        w.write_record([
            row.generation.to_string(),
            row.chosen_best_distance.to_string(),
            row.population_min_distance.to_string(),
            row.chosen_expression.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use evoshade_core::TraceRow;

    #[test]
    fn header_and_rows() {
        let trace = ConvergenceTrace {
            rows: vec![TraceRow {
                generation: 0,
                chosen_best_distance: 12.5,
                population_min_distance: 3.0,
                chosen_expression: "(sin y)".into(),
            }],
        };
        let mut buf = Vec::new();
        write_csv(&trace, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "generation,chosen_best_distance,population_min_distance,chosen_expression\n0,12.5,3,(sin y)\n"
        );
    }
}
