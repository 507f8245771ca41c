//! Random Erdős–Rényi Potts model, Gibbs sampling and the sample CSV format.

use graphreg::io::{potts_params_to_text, potts_samples_table};
use graphreg::potts::{generate_er_potts, mcmc_sample, DEFAULT_VAR_H, DEFAULT_VAR_J};

fn main() -> graphreg::Result<()> {
    let params = generate_er_potts(10, 3, 2.5, DEFAULT_VAR_H.sqrt(), DEFAULT_VAR_J.sqrt(), 1)?;
    println!("{} edges, mean degree {:.2}", params.edges().len(), 2.0 * params.edges().len() as f64 / 10.0);
    let samples = mcmc_sample(&params, 5000, 1000, 10, 2)?;
    let mean_energy = samples.iter().map(|x| params.energy(x).unwrap()).sum::<f64>() / samples.p() as f64;
    println!("mean energy over {} samples: {mean_energy:.4}", samples.p());
    println!("model document starts with: {:?}", potts_params_to_text(&params).lines().next());
    let csv = potts_samples_table(&samples.truncate(3)?).to_csv_string();
    print!("{csv}");
    Ok(())
}
