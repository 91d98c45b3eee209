//! The randomized sampler: every draw is new until the valid space runs
//! out, then the session starts over.

use std::collections::HashSet;

use twise::model::{compile_tree, parse_tree};
use twise::sat::SamplerSession;

fn main() -> anyhow::Result<()> {
    let phone = compile_tree(&parse_tree(include_str!("../data/phone.tree"))?);
    let mut session = SamplerSession::new(&phone, 42)?;
    let mut seen = HashSet::new();
    for i in 1..=14 {
        let p = session.next_product();
        let fresh = seen.insert(p.clone());
        println!(
            "{i:>2} {:?} {} restarts={}",
            p,
            if fresh { "new" } else { "repeat" },
            session.reinitializations()
        );
    }
    println!("{} valid products in this model", seen.len());
    Ok(())
}
