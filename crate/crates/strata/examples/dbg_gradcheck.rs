// Scratch: margin check for the unit-test configuration.
use strata::classifier::LevelClassifier;
use strata::corpus::{encode_batch, load_embeddings, Vocabulary};
use strata::numeric::finite_difference_check;
use strata::rng::stream;
use rand::Rng;
use ndarray::ArrayD;

fn main() {
    let d = 4;
    let tokens = ["apple", "brick", "cloud", "delta", "ember", "frost"];
    let mut vocab_file = String::from("<pad>\n<unk>\n");
    for t in tokens { vocab_file.push_str(t); vocab_file.push('\n'); }
    let vocab = Vocabulary::read_from(vocab_file.as_bytes()).unwrap();
    for (wseed, cseed) in [(7000u64, 70u64), (7001, 71), (7002, 72), (7003, 73)] {
        let lines: Vec<String> = tokens.iter().enumerate().map(|(i, t)| {
            let mut rng = stream(wseed, &format!("emb/{i}"));
            let values: Vec<String> = (0..d).map(|_| format!("{:.6}", rng.random::<f64>() * 2.0 - 1.0)).collect();
            format!("{t} {}", values.join(" "))
        }).collect();
        let (emb, _) = load_embeddings(lines.join("\n").as_bytes(), &vocab, d).unwrap();
        let clf = LevelClassifier::init(1, 4, 5, 3, vec!["c0".into(), "c1".into()], 0.0, 0.0, None, &mut stream(cseed, "clf"));
        let texts = ["apple brick cloud delta ember", "frost delta apple brick cloud", "cloud ember frost apple delta"];
        let seqs: Vec<Vec<String>> = texts.iter().map(|t| t.split(' ').map(str::to_string).collect()).collect();
        let classes = ["c0".to_string(), "c1".to_string(), "c0".to_string()];
        let batch = encode_batch(&seqs, Some(&classes), &[String::new(), String::new(), String::new()], &vocab, 5, &["c0".to_string(), "c1".to_string()]).unwrap();
        let values: Vec<ArrayD<f64>> = clf.params().iter().map(|p| p.value.clone()).collect();
        let run = |vals: &[ArrayD<f64>]| -> (f64, Vec<ArrayD<f64>>) {
            let mut c = clf.clone();
            for (param, v) in c.params_mut().into_iter().zip(vals) { param.value = v.clone(); }
            let mut rng = stream(0, "unused");
            let loss = c.loss_and_grads(&emb, &batch, &mut rng).unwrap();
            let grads = c.params().iter().map(|p| p.grad.clone()).collect();
            (loss, grads)
        };
        let (_, analytic) = run(&values);
        let err = finite_difference_check(|vals| run(vals).0, &values, &analytic, 1e-5);
        println!("world {wseed} clf {cseed}: max rel err {err:.3e}");
    }
}
