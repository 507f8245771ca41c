//! The GRL1 binary container and CSV tables: write, read back, compare.

use graphreg::io::{read_grl1, samples_table, write_grl1, Table};
use graphreg::sampling::sample_gaussian;
use graphreg::spherical::{covariance_from_interaction, generate_goe, DEFAULT_MU_TOL};

fn main() -> graphreg::Result<()> {
    let model = covariance_from_interaction(&generate_goe(5, 0.5, 1)?, DEFAULT_MU_TOL)?;
    let samples = sample_gaussian(&model, 4, 2)?;

    let mut bytes = Vec::new();
    write_grl1(&mut bytes, &samples.data)?;
    let back = read_grl1(bytes.as_slice())?;
    println!("GRL1: {} bytes, {}x{} matrix, identical: {}", bytes.len(), back.nrows(), back.ncols(), back == samples.data);

    let csv = samples_table(&samples).meta("note", "four samples").to_csv_string();
    print!("{csv}");
    let parsed = Table::parse(&csv)?;
    println!("first column parses back exactly: {}", parsed.floats("x0")? == samples.data.column(0).iter().copied().collect::<Vec<_>>());
    Ok(())
}
