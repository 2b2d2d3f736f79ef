//! Grow branching n-gram trees forward and backward from a cause word and
//! read occurrence rates off the deepest level.
//!
//! Run with: cargo run -p causetext --example cause_trees

use causetext::causetree::{build_index, grow_tree, Direction, TreeNode};
use causetext::ingest::{preprocess, PreprocessFlags, RawDocument};

fn render(node: &TreeNode, depth: usize) {
    let pad = "  ".repeat(depth);
    let rate = node.rate.map(|r| format!("  rate={r:.4}")).unwrap_or_default();
    println!("{pad}{} (count={}){rate}", node.ngram.join(" "), node.count);
    for child in &node.children {
        render(child, depth + 1);
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let texts = [
        "the storm caused the flood in town",
        "the storm caused the flood in parts of town",
        "the heat caused the fire on the hill",
        "the heat caused a fire near the road",
        "rain caused the flood in my street",
        "rain caused mud on the road",
        "wind caused the dust in the air",
        "ice caused the crash on the road",
    ];
    let corpus: Vec<_> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| {
            preprocess(
                &RawDocument {
                    id: format!("d{i}"),
                    text: (*t).to_string(),
                    timestamp: "2014-03-01T12:00:00Z".parse().unwrap(),
                    lang: "en".to_string(),
                },
                PreprocessFlags::default(),
            )
        })
        .collect();

    // index up to 4-grams: a depth-3 tree reads its rates off 4-gram counts
    let index = build_index(&corpus, 4)?;
    println!(
        "index: {} docs, {} distinct unigrams, {} distinct 4-grams\n",
        index.num_docs,
        index.distinct(1),
        index.distinct(4)
    );

    let fwd = grow_tree(&index, "caused", Direction::Forward, 3, 2)?;
    println!("forward from {:?}:", fwd.root);
    render(&fwd.tree, 0);

    println!("\ndeepest-level n-gram rates (count / num_docs):");
    for (gram, rate) in &fwd.rates {
        println!("  {gram}: {rate:.4}");
    }

    let back = grow_tree(&index, "caused", Direction::Backward, 2, 2)?;
    println!("\nbackward from {:?}:", back.root);
    render(&back.tree, 0);
    Ok(())
}
