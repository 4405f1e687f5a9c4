// scratch diagnostic, not part of the deliverable
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use venuesim_core::ingest::{self, Format, RowPolicy, SplitSpec};
use venuesim_core::recsys::*;
use venuesim_core::types::*;

fn main() {
    let (raw, _) = ingest::load_checkins("/tmp/vs_demo/city/checkins.tsv", Format::Raw, RowPolicy::Skip).unwrap();
    let d = ingest::preprocess(&raw, &ingest::default_exclusions());
    let (train, _post) = ingest::split(&d, SplitSpec { t_train_days: 210.0, t_max_days: 304.0 }).unwrap();
    let m = build_interactions(event_pairs(&train.events));
    println!("matrix: {} users x {} venues, nnz {}", m.n_users(), m.n_venues(), m.nnz());
    let hyper = TrainingHyper::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    let t0 = std::time::Instant::now();
    let (state, losses) = train_mf(&m, d.users.len(), d.catalog.len(), &hyper, &mut rng);
    println!("mf epochs {} losses first {:?} last {:?} in {:?}", losses.len(), &losses[..3.min(losses.len())], losses.last(), t0.elapsed());

    let model = RecommenderModel {
        kind: RecommenderKind::Mf, hyper,
        popularity: {
            let mut pop = vec![0u32; d.catalog.len()];
            for (c, vid) in m.venues().iter().enumerate() { pop[vid.idx()] = m.col(c as u32).len() as u32; }
            pop
        },
        known_users: { let mut k = vec![false; d.users.len()]; for u in m.users() { k[u.idx()] = true; } k },
        state: ModelState::Factors(state),
    };
    // rank correlation between MF score and popularity over candidate sets
    let ctx = ScoreContext { catalog: &d.catalog, t: 0 };
    use rand::Rng;
    let mut agree = 0u32; let mut total = 0u32;
    let mut top_pop_share = 0.0; let mut sets = 0;
    for _ in 0..300 {
        let cat = CategoryId(rng.gen_range(0..d.catalog.categories().len() as u32));
        let cands = d.catalog.venues_in_category(cat);
        if cands.len() < 10 { continue; }
        let user = UserId(rng.gen_range(0..d.users.len() as u32));
        if !model.knows_user(user) { continue; }
        let raw = model.raw_scores(user, cands, &ctx);
        // concordance between score order and popularity order on sampled pairs
        for _ in 0..50 {
            let i = rng.gen_range(0..cands.len());
            let j = rng.gen_range(0..cands.len());
            let (pi, pj) = (model.popularity[cands[i].idx()], model.popularity[cands[j].idx()]);
            if pi == pj { continue; }
            total += 1;
            if (raw[i] > raw[j]) == (pi > pj) { agree += 1; }
        }
        // does the argmax score sit on a popular venue?
        let best = raw.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap().0;
        let max_pop = cands.iter().map(|v| model.popularity[v.idx()]).max().unwrap();
        if max_pop > 0 {
            top_pop_share += model.popularity[cands[best].idx()] as f64 / max_pop as f64;
            sets += 1;
        }
    }
    println!("MF score-popularity concordance: {:.3} ({} pairs)", agree as f64 / total as f64, total);
    println!("argmax popularity ratio vs best possible: {:.3} over {} sets", top_pop_share / sets as f64, sets);
}
