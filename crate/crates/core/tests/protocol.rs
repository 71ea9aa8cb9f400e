use proptest::prelude::*;

use leadsel_core::harness::check_message_bounds;
use leadsel_core::model::{generate_instance, utility, Capacities, Mode, UeId};
use leadsel_core::optimal::{solve_exhaustive, SolverOptions};
use leadsel_core::protocol::{EdgeServerPolicy, IncentivePolicy, Transport};
use leadsel_core::{run_episode, ProtocolConfig, Score, Threshold};

fn transport(p2p: bool) -> Transport {
    if p2p {
        Transport::P2p
    } else {
        Transport::Broadcast
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn outcome_is_a_valid_assignment(
        seed in 0u64..1_000_000,
        n in 1usize..=9,
        rho in 0i64..=10,
        p2p in any::<bool>(),
        cap in proptest::option::of(1usize..=3),
        edge in any::<bool>(),
        boost in any::<bool>(),
    ) {
        let inst = generate_instance(n, seed, None).unwrap();
        let rho = Threshold::from_int(rho).unwrap();
        let cfg = ProtocolConfig {
            transport: transport(p2p),
            caps: cap.map(|c| Capacities::uniform(&inst, c)),
            edge_server: if edge { EdgeServerPolicy::enabled_default() } else { EdgeServerPolicy::Disabled },
            incentive: if boost {
                IncentivePolicy::Boost { delta: Score::from_int(3), accept_prob: 0.5 }
            } else {
                IncentivePolicy::None
            },
            ..ProtocolConfig::new(rho)
        };
        let out = run_episode(&inst, &cfg, seed ^ 0x5eed).unwrap();
        let eff = out.instance(&inst);
        out.assignment.validate(eff).unwrap();
        prop_assert_eq!(utility(eff, &out.assignment).unwrap(), out.utility);

        for &l in &out.assignment.leaders {
            prop_assert!(l == UeId::EDGE || eff.lii(l) > rho.score(), "leader {} below threshold", l);
        }
        for (&m, &l) in &out.assignment.follows {
            prop_assert!(eff.lxi(m, l) > Score::ZERO, "{} follows {} with zero LXI", m, l);
        }
        if let Some(c) = cap {
            for (leader, members) in out.assignment.clusters() {
                if leader != UeId::EDGE {
                    prop_assert!(members.len() <= c);
                }
            }
        }
        if !edge {
            prop_assert!(!out.assignment.leaders.contains(&UeId::EDGE));
        }
    }

    #[test]
    fn optimum_dominates_episode(
        seed in 0u64..1_000_000,
        n in 2usize..=8,
        rho in 0i64..=10,
        p2p in any::<bool>(),
    ) {
        let inst = generate_instance(n, seed, None).unwrap();
        let rho = Threshold::from_int(rho).unwrap();
        let cfg = ProtocolConfig { transport: transport(p2p), ..ProtocolConfig::new(rho) };
        let out = run_episode(&inst, &cfg, seed).unwrap();
        let opt = solve_exhaustive(&inst, Threshold::ZERO, &SolverOptions::with_mode(Mode::Relaxed)).unwrap();
        prop_assert!(out.utility <= opt.utility);
    }

    #[test]
    fn uncapacitated_runs_respect_message_bounds(
        seed in 0u64..1_000_000,
        n in 1usize..=12,
        rho in 0i64..=10,
        p2p in any::<bool>(),
    ) {
        let inst = generate_instance(n, seed, None).unwrap();
        let cfg = ProtocolConfig {
            transport: transport(p2p),
            ..ProtocolConfig::new(Threshold::from_int(rho).unwrap())
        };
        let out = run_episode(&inst, &cfg, seed).unwrap();
        prop_assert!(check_message_bounds(&out, n, out.candidate_leaders, cfg.transport));
        prop_assert_eq!(out.centralized_messages, n + 1);
        prop_assert_eq!(out.counts.total, out.messages.len());
    }

    #[test]
    fn transport_does_not_change_decisions(
        seed in 0u64..1_000_000,
        n in 1usize..=10,
        rho in 0i64..=10,
        cap in proptest::option::of(1usize..=3),
    ) {
        let inst = generate_instance(n, seed, None).unwrap();
        let run = |t| {
            let cfg = ProtocolConfig {
                transport: t,
                caps: cap.map(|c| Capacities::uniform(&inst, c)),
                ..ProtocolConfig::new(Threshold::from_int(rho).unwrap())
            };
            run_episode(&inst, &cfg, seed).unwrap()
        };
        let b = run(Transport::Broadcast);
        let p = run(Transport::P2p);
        prop_assert_eq!(&b.assignment, &p.assignment);
        prop_assert_eq!(b.utility, p.utility);
        let again = run(Transport::Broadcast);
        prop_assert_eq!(b.messages, again.messages);
    }
}
