use alpaga_core::strategy::{Triple, NoCoveringTriple};
use alpaga_core::testkit::{generate_game, solver_corpus, GeneratorConfig};
use alpaga_core::{
    parse_game, solve_game, transform_objective, verify_strategy, Cell, Choice, CpreKind, GameStructure, Session,
    SolveOptions, Status, StrategyTable,
};

const EXAMPLE: &str = "ALPHABET : a\nSTATES : 1, 2,3\nINIT : 1\nSAFE : 1,2,3\nTARGET : 2\nTRANS :\n1, 1 , a\n1,2, a\n2, 3, a\n3, 3,a\nOBS :\n1:1\n2:1\n3:0\n";

/// Depth-first search over every play consistent with the strategy,
/// reporting a failure on losing knowledge or on a simple cycle whose least
/// priority is odd.
fn tree_search(g: &GameStructure, table: &StrategyTable, path: &mut Vec<Cell>) -> bool {
    let cell = path.last().unwrap().clone();
    if let Some(pos) = path[..path.len() - 1].iter().position(|c| *c == cell) {
        let least = path[pos..].iter().map(|c| g.priority_of_cell(c).unwrap()).min().unwrap();
        return least % 2 == 0;
    }
    if g.sinks().is_some_and(|s| cell.contains(s.lose)) {
        return false;
    }
    let Ok((action, _)) = table.lookup(&cell) else {
        return false;
    };
    for o in g.compatible_observations(&cell, action) {
        path.push(g.knowledge_update(&cell, action, o));
        let ok = tree_search(g, table, path);
        path.pop();
        if !ok {
            return false;
        }
    }
    true
}

#[test]
fn example_strategy_fails_verification() {
    let g = transform_objective(&parse_game(EXAMPLE, true).unwrap().game);
    let n = g.num_locations();
    let always_a = StrategyTable::new(
        g.observations().iter().map(|o| Triple { cell: o.members.clone(), rank: 0, action: 0 }).collect(),
    );
    assert!(!verify_strategy(&g, &always_a, &Cell::from_indices(n, [0])));
}

#[test]
fn all_zero_priorities_always_verify() {
    let text = "ALPHABET : a, b\nSTATES : 1, 2, 3\nINIT : 1\nTRANS :\n1, 2, a\n1, 3, a\n1, 1, b\n2, 1, a\n2, 3, b\n3, 3, a\n3, 1, b\nOBS :\n1, 2 : 0\n3 : 0\n";
    let g = transform_objective(&parse_game(text, true).unwrap().game);
    let n = g.num_locations();
    for action in 0..2 {
        let table = StrategyTable::new(
            g.observations().iter().map(|o| Triple { cell: o.members.clone(), rank: 0, action }).collect(),
        );
        assert!(verify_strategy(&g, &table, &Cell::from_indices(n, [0])));
    }
}

#[test]
fn reaching_win_everywhere_verifies() {
    let text = "ALPHABET : a\nSTATES : 1, 2\nINIT : 1\nTARGET : 2\nTRANS :\n1, 2, a\n2, 2, a\nOBS :\n1 : 1\n2 : 1\n";
    let s = solve_game(&parse_game(text, true).unwrap().game, SolveOptions::default()).unwrap();
    assert!(s.initial_winning);
    assert!(verify_strategy(&s.game, &s.result.strategy, &s.game.initial_cell()));
}

#[test]
fn uncovered_knowledge_fails_verification() {
    let g = transform_objective(&parse_game(EXAMPLE, true).unwrap().game);
    let empty = StrategyTable::new(Vec::new());
    assert_eq!(empty.lookup(&g.initial_cell()), Err(NoCoveringTriple));
    assert!(!verify_strategy(&g, &empty, &g.initial_cell()));
}

#[test]
fn verifier_agrees_with_tree_search() {
    for seed in 0..300 {
        let cfg = GeneratorConfig { locations: 2 + (seed % 4) as usize, ..solver_corpus(seed) };
        let base = generate_game(&cfg);
        let s = solve_game(&base, SolveOptions { cpre: CpreKind::Enumerative, simplify: false, ..Default::default() }).unwrap();
        let g = &s.game;
        let init = g.initial_cell();
        let solved = s.result.strategy.clone();
        // A deliberately naive strategy: always the first action.
        let naive = StrategyTable::new(
            g.observations().iter().map(|o| Triple { cell: o.members.clone(), rank: 0, action: 0 }).collect(),
        );
        for table in [&solved, &naive] {
            let expected = tree_search(g, table, &mut vec![init.clone()]);
            assert_eq!(verify_strategy(g, table, &init), expected, "seed {seed}");
        }
    }
}

#[test]
fn verified_strategies_survive_random_rollouts() {
    let mut games = 0;
    for seed in 0..200 {
        let base = generate_game(&solver_corpus(seed));
        let s = solve_game(&base, SolveOptions::default()).unwrap();
        if !s.initial_winning {
            continue;
        }
        games += 1;
        let cells = 1usize << s.game.num_locations().min(10);
        for rollout in 0..(1000 / 20) {
            let mut sess = Session::new(&s.game, &s.result.strategy, seed * 1000 + rollout);
            let mut seen: Vec<Cell> = vec![sess.knowledge().clone()];
            for _ in 0..2 * cells {
                if sess.status() != Status::Running {
                    break;
                }
                sess.step(Choice::Random).unwrap();
                let k = sess.knowledge().clone();
                if let Some(pos) = seen.iter().rposition(|c| *c == k) {
                    let least = seen[pos..].iter().map(|c| s.game.priority_of_cell(c).unwrap()).min().unwrap();
                    assert_eq!(least % 2, 0, "seed {seed} rollout {rollout}");
                }
                seen.push(k);
            }
            assert_ne!(sess.status(), Status::Lost, "seed {seed}");
        }
    }
    assert!(games >= 20);
}

#[test]
fn steps_are_deterministic_for_a_seed() {
    let flipped = EXAMPLE.replace("1:1\n", "1:0\n");
    let s = solve_game(&parse_game(&flipped, true).unwrap().game, SolveOptions::default()).unwrap();
    let trace = |seed: u64| {
        let mut sess = Session::new(&s.game, &s.result.strategy, seed);
        (0..20)
            .map_while(|_| sess.step(Choice::Random).ok().map(|h| h.observation))
            .collect::<Vec<_>>()
    };
    assert_eq!(trace(42), trace(42));
}
