//! Writes the bundled benchmark tasks (blocks world, sliding tile puzzles,
//! visit-all grids) as FDR files.
//!
//! ```text
//! cargo run --example gen_tasks -- tasks/
//! ```

use std::path::PathBuf;

use samplan::sas::{write_sas, MutexGroup, Operator, PartialState, Task, VariableDef, UNDEFINED};

fn var(index: usize, name: String, facts: Vec<String>) -> VariableDef {
    VariableDef {
        index,
        name,
        fact_names: facts,
    }
}

fn facts(n: usize, list: &[(usize, u32)]) -> PartialState {
    PartialState::from_facts(n, list)
}

/// Four-operator blocks world. Variables: one position variable per block
/// (on another block, on the table, or held), one clear flag per block and
/// the hand flag. `towers` lists the initial towers bottom-up; the goal is a
/// single tower `goal` bottom-up.
fn blocks(name: &str, n: usize, towers: &[&[usize]], goal_tower: &[usize]) -> Task {
    let label = |b: usize| ((b'a' + b as u8) as char).to_string();
    let others = |x: usize| (0..n).filter(move |&y| y != x);
    // position value indices: on(x, y) in order of y, then table, then held
    let on_val = |x: usize, y: usize| -> u32 { others(x).position(|o| o == y).unwrap() as u32 };
    let table = (n - 1) as u32;
    let held = n as u32;
    let clear_var = |x: usize| n + x;
    let hand = 2 * n;
    let nv = 2 * n + 1;

    let mut vars = Vec::new();
    for x in 0..n {
        let mut f: Vec<String> = others(x)
            .map(|y| format!("Atom on({}, {})", label(x), label(y)))
            .collect();
        f.push(format!("Atom ontable({})", label(x)));
        f.push(format!("Atom holding({})", label(x)));
        vars.push(var(x, format!("pos-{}", label(x)), f));
    }
    for x in 0..n {
        vars.push(var(
            n + x,
            format!("clear-{}", label(x)),
            vec![
                format!("Atom clear({})", label(x)),
                format!("NegatedAtom clear({})", label(x)),
            ],
        ));
    }
    vars.push(var(
        hand,
        "hand".into(),
        vec!["Atom handempty()".into(), "NegatedAtom handempty()".into()],
    ));

    let mut ops = Vec::new();
    for x in 0..n {
        ops.push(Operator::new(
            format!("pick-up {}", label(x)),
            facts(nv, &[(x, table), (clear_var(x), 0), (hand, 0)]),
            facts(nv, &[(x, held), (clear_var(x), 1), (hand, 1)]),
            1,
        ));
        ops.push(Operator::new(
            format!("put-down {}", label(x)),
            facts(nv, &[(x, held)]),
            facts(nv, &[(x, table), (clear_var(x), 0), (hand, 0)]),
            1,
        ));
        for y in others(x) {
            ops.push(Operator::new(
                format!("stack {} {}", label(x), label(y)),
                facts(nv, &[(x, held), (clear_var(y), 0)]),
                facts(nv, &[(x, on_val(x, y)), (clear_var(y), 1), (clear_var(x), 0), (hand, 0)]),
                1,
            ));
            ops.push(Operator::new(
                format!("unstack {} {}", label(x), label(y)),
                facts(nv, &[(x, on_val(x, y)), (clear_var(x), 0), (hand, 0)]),
                facts(nv, &[(x, held), (clear_var(y), 0), (clear_var(x), 1), (hand, 1)]),
                1,
            ));
        }
    }

    let mut mutexes = Vec::new();
    for x in 0..n {
        let mut group: Vec<(usize, u32)> = others(x).map(|y| (y, on_val(y, x))).collect();
        group.push((clear_var(x), 0));
        group.push((x, held));
        mutexes.push(MutexGroup { facts: group });
    }
    let mut hand_group = vec![(hand, 0)];
    hand_group.extend((0..n).map(|x| (x, held)));
    mutexes.push(MutexGroup { facts: hand_group });

    let mut init = vec![UNDEFINED; nv];
    for tower in towers {
        for (i, &b) in tower.iter().enumerate() {
            init[b] = if i == 0 { table } else { on_val(b, tower[i - 1]) };
            init[clear_var(b)] = if i + 1 == tower.len() { 0 } else { 1 };
        }
    }
    init[hand] = 0;
    let mut goal = PartialState::undefined(nv);
    for w in goal_tower.windows(2) {
        goal.set(w[1], on_val(w[1], w[0]));
    }
    Task::new(name, vars, ops, mutexes, PartialState::from_values(init), goal, 0).unwrap()
}

/// Sliding tile puzzle on a `rows × cols` board: one position variable per
/// tile plus the blank position. Goal: tile `t` at cell `t`, blank last.
fn puzzle(name: &str, rows: usize, cols: usize, init_board: &[usize]) -> Task {
    let cells = rows * cols;
    let tiles = cells - 1;
    let blank = tiles;
    let nv = cells;
    let mut vars = Vec::new();
    for t in 0..tiles {
        vars.push(var(
            t,
            format!("tile-{}", t + 1),
            (0..cells).map(|p| format!("Atom at(t{}, p{p})", t + 1)).collect(),
        ));
    }
    vars.push(var(
        blank,
        "blank".into(),
        (0..cells).map(|p| format!("Atom blank(p{p})")).collect(),
    ));
    let neighbours = |p: usize| {
        let (r, c) = (p / cols, p % cols);
        let mut out = Vec::new();
        if r > 0 {
            out.push(p - cols);
        }
        if r + 1 < rows {
            out.push(p + cols);
        }
        if c > 0 {
            out.push(p - 1);
        }
        if c + 1 < cols {
            out.push(p + 1);
        }
        out
    };
    let mut ops = Vec::new();
    for t in 0..tiles {
        for from in 0..cells {
            for to in neighbours(from) {
                ops.push(Operator::new(
                    format!("move t{} p{from} p{to}", t + 1),
                    facts(nv, &[(t, from as u32), (blank, to as u32)]),
                    facts(nv, &[(t, to as u32), (blank, from as u32)]),
                    1,
                ));
            }
        }
    }
    let mutexes = (0..cells)
        .map(|p| MutexGroup {
            facts: (0..nv).map(|v| (v, p as u32)).collect(),
        })
        .collect();
    // init_board[p] = tile number at cell p (0 = blank)
    let mut init = vec![0u32; nv];
    for (p, &tile) in init_board.iter().enumerate() {
        let v = if tile == 0 { blank } else { tile - 1 };
        init[v] = p as u32;
    }
    let mut goal = PartialState::undefined(nv);
    for t in 0..tiles {
        goal.set(t, t as u32);
    }
    Task::new(name, vars, ops, mutexes, PartialState::from_values(init), goal, 0).unwrap()
}

/// Visit-all on a `rows × cols` grid: robot position plus one visited flag
/// per cell; goal: every cell visited.
fn visitall(name: &str, rows: usize, cols: usize) -> Task {
    let cells = rows * cols;
    let robot = 0;
    let nv = cells + 1;
    let mut vars = vec![var(
        robot,
        "robot".into(),
        (0..cells).map(|p| format!("Atom at-robot(c{p})")).collect(),
    )];
    for p in 0..cells {
        vars.push(var(
            p + 1,
            format!("visited-c{p}"),
            vec![format!("Atom visited(c{p})"), format!("NegatedAtom visited(c{p})")],
        ));
    }
    let mut ops = Vec::new();
    for from in 0..cells {
        let (r, c) = (from / cols, from % cols);
        let mut next = Vec::new();
        if r > 0 {
            next.push(from - cols);
        }
        if r + 1 < rows {
            next.push(from + cols);
        }
        if c > 0 {
            next.push(from - 1);
        }
        if c + 1 < cols {
            next.push(from + 1);
        }
        for to in next {
            ops.push(Operator::new(
                format!("move c{from} c{to}"),
                facts(nv, &[(robot, from as u32)]),
                facts(nv, &[(robot, to as u32), (to + 1, 0)]),
                1,
            ));
        }
    }
    let mut init = vec![1u32; nv];
    init[robot] = 0;
    init[1] = 0;
    let mut goal = PartialState::undefined(nv);
    for p in 0..cells {
        goal.set(p + 1, 0);
    }
    Task::new(name, vars, ops, vec![], PartialState::from_values(init), goal, 0).unwrap()
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "tasks".into()));
    std::fs::create_dir_all(&dir)?;
    let tasks = vec![
        blocks("blocks-4", 4, &[&[2, 0], &[1, 3]], &[3, 2, 1, 0]),
        blocks("blocks-5", 5, &[&[1, 3], &[4, 0, 2]], &[4, 3, 2, 1, 0]),
        blocks("blocks-6", 6, &[&[5, 0, 2], &[1, 4, 3]], &[5, 4, 3, 2, 1, 0]),
        blocks(
            "blocks-7-tower",
            7,
            &[&[2], &[6, 4, 3, 1, 0, 5]],
            &[5, 4, 1, 3, 2, 6, 0],
        ),
        puzzle("puzzle-2x3", 2, 3, &[4, 1, 3, 0, 2, 5]),
        puzzle("puzzle-3x3", 3, 3, &[8, 1, 3, 4, 0, 2, 7, 6, 5]),
        visitall("visitall-3x3", 3, 3),
        visitall("visitall-3x4", 3, 4),
    ];
    for task in tasks {
        let path = dir.join(format!("{}.sas", task.name));
        std::fs::write(&path, write_sas(&task))?;
        println!("{}", path.display());
    }
    Ok(())
}
