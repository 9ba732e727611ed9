//! Prints the level structure of the built-in models.
use lca_weights::experiment::describe;

fn main() -> lca_weights::Result<()> {
    for spec in ["padic{2,3}", "padic{3,2}", "padic{5,1}", "window{4}"] {
        println!("{}", describe(spec)?);
    }
    Ok(())
}
