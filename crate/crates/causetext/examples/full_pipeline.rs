//! Run the complete analysis pipeline as a library call: write a tiny raw
//! stream plus resources to a scratch directory, invoke the report-all
//! orchestration, and list the artifacts it leaves behind.
//!
//! Run with: cargo run -p causetext --example full_pipeline

use std::fs;

use causetext::pipeline::{run, CliOverrides, PipelineConfig, Subcommand};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let root = dir.path();

    // raw stream: causal posts, control candidates, one excluded post
    let mut lines = Vec::new();
    let causes = ["storm", "heat", "rain", "ice", "wind", "noise"];
    let effects = ["flood", "fire", "mud", "crash", "dust", "stress"];
    let goods = ["park", "music", "dinner", "book", "garden", "coffee"];
    let verbs = ["caused", "causes", "causing"];
    let mut minute = 0;
    for rep in 0..6 {
        for i in 0..causes.len() {
            let v = verbs[(rep + i) % 3];
            let line = match v {
                "caused" => format!("the {} caused the {} in my town", causes[i], effects[i]),
                "causes" => format!("i think the {} causes the {} every year", causes[i], effects[(i + rep) % 6]),
                _ => format!("the {} was causing the {} near my street", causes[i], effects[(i + 1) % 6]),
            };
            push(&mut lines, minute, &line);
            minute += 1;
            // control candidates share vocabulary so odds ratios stay finite
            let good = if (rep + i) % 2 == 0 {
                format!("it was a good day at the {} and i was happy", goods[(i + rep) % 6])
            } else {
                format!("the {} was over and the day in my town was good", causes[(i + rep) % 6])
            };
            push(&mut lines, minute, &good);
            minute += 1;
        }
    }
    push(&mut lines, minute, "sleep and pain are correlated in this study");
    fs::write(root.join("raw.ndjson"), lines.join("\n") + "\n")?;

    fs::create_dir(root.join("stopwords"))?;
    fs::write(
        root.join("stopwords/english"),
        "the\na\nan\nis\nit\nto\nof\nand\nin\nthat\ni\nmy\nwas\nthis\nat\nevery\nnear\nthink\nyear\nday\nwe\nare\n",
    )?;
    fs::write(root.join("stopwords/german"), "der\ndie\ndas\nund\nist\n")?;
    fs::write(
        root.join("treebank.txt"),
        "the/DT storm/NN caused/VBD the/DT flood/NN in/IN my/PRP$ town/NN\n\
         i/PRP think/VBP the/DT heat/NN causes/VBZ the/DT fire/NN every/DT year/NN\n\
         the/DT wind/NN was/VBD causing/VBG the/DT dust/NN near/IN my/PRP$ street/NN\n\
         it/PRP was/VBD a/DT good/JJ day/NN at/IN the/DT park/NN and/CC i/PRP was/VBD happy/JJ\n",
    )?;
    fs::write(
        root.join("lexicon.tsv"),
        "flood\t2.0\nfire\t3.0\nmud\t3.1\ncrash\t2.5\ndust\t3.4\nstress\t2.4\n\
         park\t7.4\nmusic\t8.1\ndinner\t6.9\nbook\t7.2\ngarden\t7.3\ncoffee\t7.3\n\
         good\t7.9\nhappy\t8.2\ntown\t5.7\nstreet\t5.5\nstorm\t2.9\nheat\t4.4\n\
         rain\t5.0\nice\t4.6\nwind\t5.4\nnoise\t3.6\nyear\t6.3\nday\t7.1\n",
    )?;

    let overrides = CliOverrides {
        input: Some(root.join("raw.ndjson")),
        stopword_dir: Some(root.join("stopwords")),
        treebank: Some(root.join("treebank.txt")),
        lexicon: Some(root.join("lexicon.tsv")),
        output_dir: Some(root.join("out")),
        percentile: Some(60.0),
        lda_topics: Some(4),
        lda_iterations: Some(80),
        ..CliOverrides::default()
    };
    let cfg = PipelineConfig::resolve(&overrides)?;
    println!("config hash: {}\n", cfg.config_hash());

    run(Subcommand::ReportAll, &cfg)?;

    println!("\nartifacts:");
    let mut names: Vec<_> = fs::read_dir(root.join("out"))?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect();
    names.sort();
    for name in names {
        println!("  {name}");
    }
    Ok(())
}

fn push(lines: &mut Vec<String>, minute: usize, text: &str) {
    lines.push(format!(
        r#"{{"id": "d{minute:03}", "text": "{text}", "timestamp": "2014-03-01T{:02}:{:02}:00Z", "lang": "en"}}"#,
        12 + minute / 60,
        minute % 60,
    ));
}
