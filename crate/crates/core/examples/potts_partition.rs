//! Log-partition of a Potts model by enumeration and by annealed importance sampling.

use graphreg::potts::{ais_log_z, exact_log_z, generate_er_potts};

fn main() -> graphreg::Result<()> {
    let params = generate_er_potts(8, 3, 2.5, 5f64.sqrt(), 1.0, 4)?;
    let exact = exact_log_z(&params)?;
    let ais = ais_log_z(&params, 1000, 100, 1, 5)?;
    println!("exact log Z {exact:.5}");
    println!("AIS   log Z {:.5} ± {:.5} (ESS {:.1} of 100 chains)", ais.estimate, ais.stderr, ais.ess);
    Ok(())
}
