//! Randomized operation sequences against the event-sourcing invariant.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crisis_mt_core::{ReviewStatus, SplitRatios};
use crisis_mt_service::service::{ReviewRequest, SubmitRequest};
use crisis_mt_service::{ExportOptions, Principal, Role, Service, ServiceConfig};

const WORDS: [&str; 6] = ["uisce", "bia", "dídean", "cúnamh", "leigheas", "teach"];

fn principal(role: Role) -> Principal {
    Principal {
        name: role.as_str().to_owned(),
        role,
    }
}

#[test]
fn state_equals_replay_at_every_step() {
    let dir = tempfile::tempdir().unwrap();
    let config = ServiceConfig {
        snapshot_every: 37,
        pairs: vec!["en-ga".parse().unwrap(), "ga-en".parse().unwrap()],
        ..ServiceConfig::new(dir.path())
    };
    let service = Service::open(config.clone()).unwrap();
    let mut rng = StdRng::seed_from_u64(500);
    let (contrib, reviewer, coord) = (principal(Role::Contributor), principal(Role::Reviewer), principal(Role::Coordinator));
    let mut outcomes = [0usize; 2];

    for step in 0..500 {
        let pair = ["en-ga", "ga-en"][rng.gen_range(0..2)];
        let ok = match rng.gen_range(0..100) {
            0..=54 => {
                let n = rng.gen_range(2..4);
                let text: Vec<&str> = (0..n).map(|_| *WORDS.choose(&mut rng).unwrap()).collect();
                let req = SubmitRequest {
                    source_text: text.join(" "),
                    target_text: format!("{} t", text.join(" ")),
                    stream: None,
                };
                service.submit(&contrib, pair, req).is_ok()
            }
            55..=89 => {
                let ids: Vec<String> = service.state().segments.keys().cloned().collect();
                match ids.choose(&mut rng) {
                    Some(id) => {
                        let verdict = if rng.gen_bool(0.7) { ReviewStatus::Accepted } else { ReviewStatus::Rejected };
                        service.review(&reviewer, id, ReviewRequest { verdict, note: None }).is_ok()
                    }
                    None => false,
                }
            }
            90..=94 => service.advance_phase(&coord, pair).is_ok(),
            _ => {
                let options = ExportOptions {
                    seed: rng.gen(),
                    ratios: SplitRatios::new(0.6, 0.2, 0.2).unwrap(),
                    ..ExportOptions::default()
                };
                service.create_export(&coord, pair, options).is_ok()
            }
        };
        outcomes[usize::from(ok)] += 1;
        assert_eq!(service.state(), service.replay().unwrap(), "diverged at step {step}");
    }
    assert!(outcomes[0] > 0 && outcomes[1] > 0, "{outcomes:?}");

    let before = service.state();
    let stats: Vec<_> = ["en-ga", "ga-en"].iter().map(|p| service.stats(p).unwrap()).collect();
    drop(service);
    let reopened = Service::open(config).unwrap();
    assert_eq!(reopened.state(), before);
    let after: Vec<_> = ["en-ga", "ga-en"].iter().map(|p| reopened.stats(p).unwrap()).collect();
    assert_eq!(after, stats);
}
