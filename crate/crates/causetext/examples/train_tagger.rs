//! Train the averaged-perceptron part-of-speech tagger, round-trip the model
//! through JSON, and tag an unseen sentence.
//!
//! Run with: cargo run -p causetext --example train_tagger

use causetext::tagger::{accuracy, train, PerceptronModel, TaggedSentence};

fn sent(s: &str) -> TaggedSentence {
    let mut words = Vec::new();
    let mut tags = Vec::new();
    for pair in s.split_whitespace() {
        let (w, t) = pair.rsplit_once('/').expect("word/TAG");
        words.push(w.to_string());
        tags.push(t.to_string());
    }
    (words, tags)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let train_set: Vec<TaggedSentence> = [
        "the/DT storm/NN caused/VBD a/DT flood/NN",
        "the/DT heat/NN causes/VBZ fires/NNS",
        "rain/NN was/VBD causing/VBG delays/NNS",
        "my/PRP$ dog/NN is/VBZ happy/JJ",
        "i/PRP read/VBP a/DT good/JJ book/NN",
        "the/DT train/NN was/VBD late/JJ today/NN",
        "we/PRP walk/VBP in/IN the/DT park/NN",
        "it/PRP is/VBZ very/RB warm/JJ",
    ]
    .iter()
    .map(|s| sent(s))
    .collect();

    let model = train(&train_set, 5, 42)?;
    println!("training accuracy: {:.4}", accuracy(&model, &train_set));

    // Persisted weights reload bit-for-bit, so tagging stays reproducible.
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("model.json");
    model.save(&path)?;
    let reloaded = PerceptronModel::load(&path)?;

    let words: Vec<String> = ["the", "rain", "caused", "a", "very", "big", "flood"]
        .iter()
        .map(|w| w.to_string())
        .collect();
    let tags = reloaded.tag_tokens(&words);
    for (w, t) in words.iter().zip(&tags) {
        print!("{w}/{t} ");
    }
    println!();
    Ok(())
}
