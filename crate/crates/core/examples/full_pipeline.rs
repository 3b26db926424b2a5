//! Drives the command-line tool end to end in a scratch folder:
//! synth → featurize → train → segment → score.

use std::path::Path;

fn conseg(args: &[&str]) {
    println!("$ conseg {}", args.join(" "));
    let argv = std::iter::once("conseg").chain(args.iter().copied());
    let code = conseg::cli::run(argv);
    assert_eq!(code, 0, "conseg exited with {code}");
}

fn main() -> std::io::Result<()> {
    let dir = tempfile::tempdir()?;
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    std::fs::write(p("synth.toml"), "num_videos = 32\ngestures_per_video = [2, 3]\ngap_length = [40, 70]\n")?;
    std::fs::write(p("train.toml"), "hidden_size = 32\nnum_layers = 2\nmax_epochs = 8\n")?;

    conseg(&["synth", "--config", &p("synth.toml"), "--out-dir", &p("train"), "--seed", "1"]);
    conseg(&["synth", "--config", &p("synth.toml"), "--out-dir", &p("held"), "--seed", "2"]);
    conseg(&["featurize", "--keypoints", &p("held/keypoints/v00000.csv"), "--out", &p("v00000.features.csv")]);
    conseg(&["train", "--corpus", &p("train"), "--config", &p("train.toml"), "--out", &p("model.bin")]);
    conseg(&["segment", "--model", &p("model.bin"), "--keypoints", &p("held"), "--out", &p("pred.txt")]);
    conseg(&["score", "--pred", &p("pred.txt"), "--gt", &p("held/annotations.txt"), "--out", &p("report.json")]);

    println!("{}", std::fs::read_to_string(Path::new(&p("report.json")))?);
    Ok(())
}
