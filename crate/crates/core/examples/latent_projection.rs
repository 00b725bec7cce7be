//! A latent space for outlets and quotes, with features projected into it.
//!
//! Two blocks of outlets cite disjoint groups of quotes, so each latent
//! dimension picks up one block: its outlets score high and the other
//! block's outlets score zero. A feature marking one group of quotes
//! projects onto the dimension of the outlets that cite it.
//!
//! ```text
//! cargo run --example latent_projection
//! ```

use nalgebra::DMatrix;
use quotus::complete::QuoteMatrix;
use quotus::latent::{correlate, decompose, project_features, rank_outlets, FeatureMatrix};
use quotus::synth::block_graph;

fn main() -> quotus::Result<()> {
    let (g, block_of) = block_graph(&[(6, 40, 0.3), (6, 40, 0.3)], 2);
    let m = QuoteMatrix::from_cells(g.outlets().len(), g.clusters().len(), g.edges(), &[])?;
    let ls = decompose(&m, 2, None);
    println!("singular values: {:.3?}", ls.s.as_slice());

    let ranking = rank_outlets(&ls, g.outlets(), 0, 3)?;
    println!("\ndimension 0, outlets by score:");
    for r in &ranking.ranked {
        let i = g.outlets().iter().position(|o| *o == r.outlet_id).unwrap();
        println!("  {}  block {}  {:+.3}", r.outlet_id, block_of[i], r.score);
    }

    let second: Vec<f64> = (0..g.clusters().len()).map(|j| f64::from(u8::from(j >= 40))).collect();
    let f = FeatureMatrix::new(
        "group",
        vec!["second group".into()],
        DMatrix::from_row_slice(1, second.len(), &second),
    )?;
    let proj = project_features(&f, &ls)?;
    println!("\nfeature \"second group\" projects to {:+.3?}", proj.l.row(0).iter().collect::<Vec<_>>());

    let values: Vec<Option<f64>> = second.iter().map(|&x| Some(x)).collect();
    let c = correlate(&values, &ls, 0)?;
    println!("Spearman rho with dimension 0: {:+.3} (p = {:.2e}, n = {})", c.rho, c.p_value, c.n);
    Ok(())
}
