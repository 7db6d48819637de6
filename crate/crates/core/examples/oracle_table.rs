// Closed-form predictions for every experiment over a range of mean photon
// numbers, as CSV on standard output.
//
// `cargo run --example oracle_table`

use spdc_wigner::experiment::{oracle_table, Settings};

pub fn run() -> spdc_wigner::Result<String> {
    Ok(oracle_table(&Settings::default())?.to_csv())
}

fn main() -> spdc_wigner::Result<()> {
    print!("{}", run()?);
    Ok(())
}
