use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::features::SubstringLexicon;

const SYLLABLES: [&str; 32] = [
    "ka", "ren", "mo", "vel", "ta", "shi", "lu", "dan", "pe", "rix", "no", "van", "sa", "mel",
    "tor", "fi", "ga", "lin", "zu", "ber", "ha", "kon", "ri", "wen", "jo", "mar", "ny", "del",
    "qu", "es", "tam", "yor",
];

const FIRST: [&str; 24] = [
    "Ana", "Ben", "Chen", "Dara", "Elif", "Femi", "Greta", "Hugo", "Ines", "Jonas", "Kira",
    "Lars", "Mina", "Nour", "Omar", "Pia", "Ravi", "Sara", "Tomas", "Uma", "Vera", "Wei",
    "Yusuf", "Zoe",
];

const LAST: [&str; 24] = [
    "Alvarez", "Berg", "Costa", "Dahl", "Eriksen", "Fischer", "Garner", "Hansen", "Ivanova",
    "Jensen", "Kowalski", "Lind", "Moreau", "Nakamura", "Okafor", "Petrov", "Quinn", "Rossi",
    "Sato", "Tanaka", "Ueda", "Varga", "Weber", "Young",
];

const BIO_WORDS: [&str; 24] = [
    "engineer", "developer", "maintainer", "rust", "python", "web", "systems", "open", "source",
    "student", "researcher", "data", "cloud", "kernel", "hacker", "designer", "writer", "tools",
    "networks", "security", "games", "music", "tea", "runner",
];

const BOT_WORDS: [&str; 16] = [
    "relay", "sentry", "herald", "keeper", "steward", "warden", "scout", "beacon", "triage",
    "linter", "release", "merge", "depend", "vault", "pulse", "forge",
];

/// Words for free-text human comments.
pub(crate) const VOCABULARY: &[&str] = &[
    "this", "change", "breaks", "the", "build", "on", "my", "machine", "when", "running", "tests",
    "with", "nightly", "compiler", "could", "you", "rebase", "against", "main", "please", "i",
    "think", "we", "should", "split", "function", "into", "two", "parts", "memory", "usage",
    "grows", "after", "upgrade", "reproduced", "locally", "using", "docker", "image", "version",
    "flag", "does", "not", "work", "windows", "linux", "mac", "path", "handling", "seems",
    "wrong", "here", "added", "a", "regression", "test", "for", "it", "docs", "need", "an",
    "update", "too", "maybe", "rename", "variable", "clearer", "performance", "dropped", "by",
    "half", "benchmark", "shows", "allocation", "in", "hot", "loop", "agree", "that", "makes",
    "sense", "let", "me", "try", "again", "tomorrow", "looks", "good", "but", "one", "nit",
    "about", "naming", "error", "message", "confusing", "users", "backport", "release", "branch",
    "cache", "invalidation", "fails", "intermittently", "timeout", "network", "retry", "logic",
    "config", "parser", "panics", "empty", "input", "edge", "case", "missing", "support",
    "feature",
];


fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Draws from `gen` until the result's lexicon status matches `want_term`.
fn matching(
    rng: &mut ChaCha8Rng,
    lex: &SubstringLexicon,
    want_term: bool,
    mut gen: impl FnMut(&mut ChaCha8Rng) -> String,
) -> String {
    for _ in 0..256 {
        let s = gen(rng);
        if lex.first_hit(&s).is_some() == want_term {
            return s;
        }
    }
    gen(rng)
}

fn syllable_word(rng: &mut ChaCha8Rng, parts: usize) -> String {
    (0..parts).map(|_| *SYLLABLES.choose(rng).unwrap()).collect()
}

fn with_term(rng: &mut ChaCha8Rng, lex: &SubstringLexicon, base: String, sep: &str) -> String {
    let term = lex.terms().choose(rng).cloned().unwrap_or_default();
    if rng.random_bool(0.5) {
        format!("{base}{sep}{term}")
    } else {
        format!("{term}{sep}{base}")
    }
}

pub(crate) fn human_login(rng: &mut ChaCha8Rng, lex: &SubstringLexicon, term: bool) -> String {
    let base = matching(rng, lex, false, |r| {
        let n = r.random_range(2..4);
        let w = syllable_word(r, n);
        if r.random_bool(0.3) {
            format!("{w}{}", r.random_range(1..100))
        } else {
            w
        }
    });
    if term {
        with_term(rng, lex, base, "")
    } else {
        base
    }
}

pub(crate) fn human_name(rng: &mut ChaCha8Rng, lex: &SubstringLexicon, term: bool) -> String {
    let base = matching(rng, lex, false, |r| {
        format!("{} {}", FIRST.choose(r).unwrap(), LAST.choose(r).unwrap())
    });
    if term {
        with_term(rng, lex, base, " ")
    } else {
        base
    }
}

pub(crate) fn human_bio(rng: &mut ChaCha8Rng, lex: &SubstringLexicon, term: bool) -> String {
    let base = matching(rng, lex, false, |r| {
        let n = r.random_range(2..6);
        let words: Vec<&str> = (0..n).map(|_| *BIO_WORDS.choose(r).unwrap()).collect();
        capitalize(&words.join(" "))
    });
    if term {
        with_term(rng, lex, base, " ")
    } else {
        base
    }
}

pub(crate) fn bot_login(rng: &mut ChaCha8Rng, lex: &SubstringLexicon, term: bool) -> String {
    let base = matching(rng, lex, false, |r| {
        if r.random_bool(0.5) {
            BOT_WORDS.choose(r).unwrap().to_string()
        } else {
            format!("{}-{}", syllable_word(r, 2), BOT_WORDS.choose(r).unwrap())
        }
    });
    if term {
        with_term(rng, lex, base, "-")
    } else {
        base
    }
}

pub(crate) fn bot_name(login: &str) -> String {
    login.split('-').map(capitalize).collect::<Vec<_>>().join(" ")
}

pub(crate) fn bot_bio(rng: &mut ChaCha8Rng, lex: &SubstringLexicon, term: bool) -> String {
    if term {
        ["Automated helper for this project", "A bot that keeps pull requests tidy", "CI status reporter"]
            .choose(rng)
            .unwrap()
            .to_string()
    } else {
        matching(rng, lex, false, |r| {
            format!("{} for {} projects", capitalize(BOT_WORDS.choose(r).unwrap()), BIO_WORDS.choose(r).unwrap())
        })
    }
}

/// Free-text comment of 4 to 14 words drawn from `vocab`.
pub(crate) fn sentence(rng: &mut ChaCha8Rng, vocab: &[&str]) -> String {
    let n = rng.random_range(4..15);
    let words: Vec<&str> = (0..n).map(|_| *vocab.choose(rng).unwrap()).collect();
    capitalize(&words.join(" "))
}

pub(crate) fn hex_id(rng: &mut ChaCha8Rng) -> String {
    format!("{:07x}", rng.random_range(0..0x1000_0000u32))
}

/// Makes `login` unique within `taken` by appending a counter.
pub(crate) fn unique(taken: &mut BTreeSet<String>, login: String) -> String {
    if taken.insert(login.clone()) {
        return login;
    }
    let mut i = 2;
    loop {
        let cand = format!("{login}{i}");
        if taken.insert(cand.clone()) {
            return cand;
        }
        i += 1;
    }
}
