//! Convert between the series coefficients theta and the Laplacian polynomial
//! coefficients xi, in floating point and in exact rationals.
//!
//! cargo run --example coefficient_conversion

use gdc::coefficients::{
    closed_form_filter, theta_to_xi, theta_to_xi_exact, to_rational, xi_to_theta, DiffusionSpec,
};

fn main() -> gdc::Result<()> {
    let theta = [0.5, 0.25, 0.25];
    let xi = theta_to_xi(&theta)?;
    println!("theta {theta:?} -> xi {xi:?}");
    println!("and back: {:?}", xi_to_theta(&xi)?);

    let q: Vec<_> = theta.iter().map(|&v| to_rational(v).unwrap()).collect();
    let exact: Vec<String> = theta_to_xi_exact(&q).iter().map(|r| r.to_string()).collect();
    println!("exact xi: {}", exact.join(", "));

    // Closed-form xi for PPR. The series in L converges only for alpha > 0.5.
    for alpha in [0.75, 0.25] {
        let xi = closed_form_filter(&DiffusionSpec::ppr(alpha)?, 8)?;
        let shown: Vec<String> = xi.xi.iter().map(|v| format!("{v:.4}")).collect();
        println!("PPR alpha={alpha}: xi_0..8 = [{}]", shown.join(", "));
    }
    Ok(())
}
