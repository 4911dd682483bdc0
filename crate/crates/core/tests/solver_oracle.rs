use alpaga_core::cpre::{make_cpre, ControllablePredecessor, EnumerativeCpre};
use alpaga_core::solver::{solve_parity, solve_reach_and_safe, solve_reach_or_safe, Objective};
use alpaga_core::testkit::{generate_game, oracle_solve, solver_corpus};
use alpaga_core::{solve_game, transform_objective, verify_strategy, Antichain, Cell, CpreKind, GameStructure, SolveOptions};

fn with_priorities(g: &GameStructure, prio: u32) -> GameStructure {
    let obs = g
        .observations()
        .iter()
        .map(|o| (o.id.clone(), o.members.iter().collect(), prio))
        .collect();
    GameStructure::new(
        g.locations().to_vec(),
        g.actions().to_vec(),
        g.initial().to_vec(),
        g.transitions().collect::<Vec<_>>(),
        obs,
        g.safe().iter().collect(),
        g.target().iter().collect(),
    )
    .unwrap()
}

#[test]
fn verdicts_match_oracle() {
    let mut winning = 0;
    for seed in 0..200 {
        let g = generate_game(&solver_corpus(seed));
        let expected = oracle_solve(&g).unwrap();
        for cpre in [CpreKind::Enumerative, CpreKind::Symbolic] {
            let s = solve_game(&g, SolveOptions { cpre, simplify: false, ..Default::default() }).unwrap();
            assert_eq!(s.initial_winning, expected, "seed {seed} {cpre:?}");
        }
        winning += expected as usize;
    }
    assert!(winning > 20 && winning < 180, "unbalanced corpus: {winning} winning");
}

#[test]
fn implementations_give_identical_results() {
    for seed in 0..100 {
        let g = generate_game(&solver_corpus(seed));
        let e = solve_game(&g, SolveOptions { cpre: CpreKind::Enumerative, ..Default::default() }).unwrap();
        let s = solve_game(&g, SolveOptions { cpre: CpreKind::Symbolic, ..Default::default() }).unwrap();
        assert_eq!(e.result.winning, s.result.winning, "seed {seed}");
        assert_eq!(e.result.strategy, s.result.strategy, "seed {seed}");
    }
}

#[test]
fn winning_antichain_is_a_fixpoint() {
    for seed in 0..100 {
        let g = transform_objective(&generate_game(&solver_corpus(seed)));
        let mut cpre = EnumerativeCpre::new(&g);
        let w = solve_parity(&mut cpre).unwrap().winning;
        let observations = Antichain::reduce(g.num_locations(), g.observations().iter().map(|o| o.members.clone()));
        assert_eq!(cpre.cpre_within(&w, Some(&observations)), w, "seed {seed}");
    }
}

#[test]
fn strategies_verify_before_and_after_simplification() {
    for seed in 0..200 {
        let g = generate_game(&solver_corpus(seed));
        let s = solve_game(&g, SolveOptions { cpre: CpreKind::Enumerative, simplify: false, ..Default::default() }).unwrap();
        if !s.initial_winning {
            continue;
        }
        let init = s.game.initial_cell();
        let raw = &s.result.strategy;
        let r1 = raw.simplify_rule1();
        let r12 = r1.simplify_rule2();
        assert!(verify_strategy(&s.game, raw, &init), "seed {seed}");
        assert!(verify_strategy(&s.game, &r1, &init), "seed {seed} rule 1");
        assert!(verify_strategy(&s.game, &r12, &init), "seed {seed} rules 1+2");
        assert!(r12.len() <= r1.len() && r1.len() <= raw.len());
        assert_eq!(r12.simplify(), r12);
        for cell in &s.result.winning {
            assert!(raw.lookup(cell).is_ok());
        }
    }
}

#[test]
fn rule2_preserves_lookup_on_every_winning_cell() {
    for seed in 0..200 {
        let g = generate_game(&solver_corpus(seed));
        let s = solve_game(&g, SolveOptions { cpre: CpreKind::Enumerative, simplify: false, ..Default::default() }).unwrap();
        let r1 = s.result.strategy.simplify_rule1();
        let r12 = r1.simplify_rule2();
        let n = s.game.num_locations();
        for max in &s.result.winning {
            let members: Vec<usize> = max.iter().collect();
            for mask in 1u32..(1 << members.len()) {
                let sub = Cell::from_indices(n, members.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &l)| l));
                let before = r1.lookup(&sub).map(|(a, _)| a);
                let after = r12.lookup(&sub).map(|(a, _)| a);
                assert_eq!(before, after, "seed {seed} cell {sub:?}");
            }
        }
    }
}

#[test]
fn building_blocks_agree_with_parity() {
    for seed in 0..100 {
        let base = generate_game(&solver_corpus(seed));

        // All priorities odd: only reaching the target (while safe) wins.
        let g = transform_objective(&with_priorities(&base, 1));
        let mut e = EnumerativeCpre::new(&g);
        let parity = solve_parity(&mut e).unwrap();
        let block = solve_reach_and_safe(&mut e).unwrap();
        assert_eq!(parity.winning, block.winning, "seed {seed} reach and safe");

        // All priorities even: staying safe forever or reaching the target wins.
        let g = transform_objective(&with_priorities(&base, 0));
        let mut e = EnumerativeCpre::new(&g);
        let parity = solve_parity(&mut e).unwrap();
        let block = solve_reach_or_safe(&mut e).unwrap();
        assert_eq!(parity.initial_winning(&g), block.initial_winning(&g), "seed {seed} reach or safe");
        let mut symbolic = make_cpre(&g, CpreKind::Symbolic).unwrap();
        assert_eq!(solve_reach_or_safe(symbolic.as_mut()).unwrap().winning, block.winning);
    }
}

#[test]
fn objective_classes_partition_observations() {
    for seed in 0..50 {
        let g = transform_objective(&generate_game(&solver_corpus(seed)));
        let obj = Objective::of(&g);
        let total: usize = obj.priority_classes.iter().map(|c| c.len()).sum();
        assert_eq!(total, g.observations().len());
    }
}
