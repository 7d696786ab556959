//! Combine per-dataset estimates with Rubin's rules: total variance,
//! degrees of freedom, fraction of missing information, and the relative
//! efficiency of using a finite number of imputations.

use panelmi::pooling::{pool, relative_efficiency};

fn main() -> panelmi::Result<()> {
    // (estimate, squared standard error) from three completed datasets.
    let estimates = [(1.0, 0.04), (1.2, 0.05), (1.1, 0.045)];
    let p = pool(&estimates)?;

    println!("pooled estimate  {:.4}", p.q_bar);
    println!("within variance  {:.4}", p.u_bar);
    println!("between variance {:.4}", p.b);
    println!("total variance   {:.6}", p.t);
    println!("rel. increase r  {:.4}", p.r);
    println!("deg. of freedom  {:.4}", p.df);
    println!("lambda           {:.4}", p.lambda);
    println!("fmi              {:.4}", p.fmi);
    println!("rel. efficiency  {:.4}", p.re);

    // Diminishing returns of extra imputations at this fmi.
    println!();
    for m in [3usize, 5, 10, 20, 50] {
        println!("m = {m:>2}: efficiency {:.4}", relative_efficiency(p.fmi, m));
    }
    Ok(())
}
