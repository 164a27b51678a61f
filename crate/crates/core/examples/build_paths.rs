//! Builds the labeled path of the bundled worked example and prints it as a
//! table and in canonical form.

use std::path::Path;

use playgraph::export::paths_table;
use playgraph::pipeline::{build, load_dataset};

fn main() {
    let file = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/fixtures/fig3_example.json");
    let ds = load_dataset(&file, false).expect("bundled fixture loads");
    let set = build(&ds, 1).expect("fixture builds");
    for path in &set.paths {
        for (k, arc) in path.arcs.iter().enumerate() {
            println!("arc {k}: {}", arc.label());
        }
    }
    print!("{}", paths_table(&set));
    println!("{}", set.to_canonical());
}
