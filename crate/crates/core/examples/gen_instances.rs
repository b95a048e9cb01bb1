//! Generates one instance of each family and prints its sizes.
//!
//!     cargo run --example gen_instances -- /tmp/instances

use std::path::PathBuf;

use anyhow::Result;
use blockmilp::instances::{GenSpec, RandomSpec, TChoice};

fn main() -> Result<()> {
    let out: Option<PathBuf> = std::env::args().nth(1).map(PathBuf::from);
    let specs = [
        GenSpec::Investment {
            scenarios: 5,
            t: TChoice::Mixed,
            upper: 5,
        },
        GenSpec::Sslp {
            servers: 3,
            clients: 5,
            scenarios: 3,
            seed: 1,
            revenue_scale: 1.0,
        },
        GenSpec::Random(RandomSpec::small(5, 1)),
    ];
    for spec in &specs {
        let p = spec.generate()?;
        let blocks = p.blocks.as_ref().map_or(1, |b| b.len());
        println!(
            "{:<28} n={:<4} d={:<3} m={:<4} blocks={blocks:<3} ||B||_1={}",
            spec.label(),
            p.n(),
            p.d(),
            p.m(),
            p.b.norm1()
        );
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            p.save(&dir.join(format!("{}.json", spec.label())))?;
        }
    }
    Ok(())
}
