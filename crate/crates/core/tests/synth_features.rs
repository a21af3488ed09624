use std::collections::BTreeMap;

use botsift_core::events::{filter_active, index_by_actor, EventStore};
use botsift_core::features::{extract_all, ExtractOptions, FeatureRow};
use botsift_core::stats::median;
use botsift_core::synth::{generate_corpus, Archetype, Corpus, CorpusSpec};

fn features(spec: &CorpusSpec) -> (Corpus, Vec<FeatureRow>) {
    let corpus = generate_corpus(spec).unwrap();
    let profiles: BTreeMap<_, _> = corpus.profiles.iter().map(|p| (p.login.clone(), p.clone())).collect();
    let accounts = filter_active(index_by_actor(&corpus.events, &profiles, &spec.window), 10);
    let store = EventStore::build(&corpus.events);
    let rows = extract_all(&accounts, &store, &ExtractOptions::default());
    (corpus, rows)
}

fn med(rows: &[FeatureRow], corpus: &Corpus, pick: impl Fn(Archetype) -> bool, f: impl Fn(&FeatureRow) -> Option<f64>) -> f64 {
    let v: Vec<f64> = rows
        .iter()
        .filter(|r| pick(corpus.archetypes[&r.login]))
        .filter_map(&f)
        .collect();
    median(&v).expect("values present")
}

#[test]
fn default_corpus_separates_by_construction() {
    let spec = CorpusSpec::default();
    let (corpus, rows) = features(&spec);
    let human = |a| a == Archetype::Human;
    let bot = |a| a != Archetype::Human;
    let mrt = |r: &FeatureRow| r.features.median_response_time;
    let sim = |r: &FeatureRow| r.features.comment_similarity;
    let per = |r: &FeatureRow| Some(r.features.periodicity);
    let bots_kept = rows.iter().filter(|r| bot(corpus.archetypes[&r.login])).count();
    assert!(bots_kept >= 70, "only {bots_kept} active bots");
    assert!(med(&rows, &corpus, bot, mrt) < med(&rows, &corpus, human, mrt));
    assert!(med(&rows, &corpus, bot, sim) > med(&rows, &corpus, human, sim));
    assert!(
        med(&rows, &corpus, |a| a == Archetype::Scanning, per) > med(&rows, &corpus, human, per)
    );
}

#[test]
fn commenting_bot_beats_every_human_on_similarity() {
    let spec = CorpusSpec {
        n_humans: 200,
        n_bots_per_archetype: 1,
        seed: 7,
        ..CorpusSpec::default()
    };
    let (corpus, rows) = features(&spec);
    let sim_of = |pick: &dyn Fn(Archetype) -> bool| -> Vec<f64> {
        rows.iter()
            .filter(|r| pick(corpus.archetypes[&r.login]))
            .filter_map(|r| r.features.comment_similarity)
            .collect()
    };
    let bot = sim_of(&|a| a == Archetype::AutomaticCommenting);
    let humans = sim_of(&|a| a == Archetype::Human);
    assert_eq!(bot.len(), 1);
    let max_h = humans.iter().cloned().fold(f64::MIN, f64::max);
    assert!(bot[0] > max_h, "bot {} vs human max {max_h}", bot[0]);
}
