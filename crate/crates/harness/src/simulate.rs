//! Protocol session simulation over the synthetic environment generator.

use serde::{Deserialize, Serialize};

use copresence::attack::{AttackSpec, FeasibilityCatalog};
use copresence::datagen::{GenConfig, Generator};
use copresence::fusion::FusedModel;
use copresence::proto::{
    emit_probe_tone, run_session, Comparator, ComparatorPlacement, MacKey, ProbeTone, Prover,
    RelayAttacker, SessionError, Tamper, Verifier,
};
use copresence::seed::{derive_seed, rng_for, stream};

use crate::HarnessError;

/// What a simulation run consists of.
#[derive(Debug, Clone)]
pub struct SimulationPlan {
    pub benign_sessions: usize,
    pub relay_sessions: usize,
    /// Adversarial sessions whose relay tampers with the MACed messages.
    pub forged_sessions: usize,
    pub attack: Option<AttackSpec>,
    pub force: bool,
    pub probe: Option<ProbeTone>,
    pub seed: u64,
    pub gen_config: GenConfig,
}

impl SimulationPlan {
    pub fn new(seed: u64) -> Self {
        let mut gen_config = GenConfig::benchmark();
        gen_config.seed = seed;
        Self {
            benign_sessions: 100,
            relay_sessions: 100,
            forged_sessions: 0,
            attack: None,
            force: false,
            probe: None,
            seed,
            gen_config,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct SessionBucket {
    pub sessions: usize,
    pub accepted: usize,
    pub mac_invalid: usize,
    pub timeouts: usize,
}

impl SessionBucket {
    pub fn acceptance_rate(&self) -> f64 {
        if self.sessions == 0 {
            0.0
        } else {
            self.accepted as f64 / self.sessions as f64
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SimulationReport {
    pub benign: SessionBucket,
    pub relay: SessionBucket,
    pub forged: SessionBucket,
}

impl SimulationReport {
    pub fn to_text(&self) -> String {
        let line = |name: &str, b: &SessionBucket| {
            format!(
                "{name:>7}: {} sessions, {} accepted ({:.1}%), {} MAC-invalid, {} timeouts\n",
                b.sessions,
                b.accepted,
                100.0 * b.acceptance_rate(),
                b.mac_invalid,
                b.timeouts,
            )
        };
        let mut out = String::new();
        out.push_str(&line("benign", &self.benign));
        out.push_str(&line("relay", &self.relay));
        if self.forged.sessions > 0 {
            out.push_str(&line("forged", &self.forged));
        }
        out
    }
}

/// Run the configured sessions against a trained model.
pub fn simulate(
    plan: &SimulationPlan,
    model: &FusedModel,
) -> Result<SimulationReport, HarnessError> {
    let catalog = FeasibilityCatalog::default();
    let generator = Generator::new(plan.gen_config.clone())?;
    let profiles = generator.config().profiles.clone();
    let non_co_mix = generator.config().non_co_mix.clone();
    let mut report = SimulationReport::default();

    let run_one = |bucket: &mut SessionBucket,
                   session_idx: u64,
                   relayed: bool,
                   tamper: Tamper|
     -> Result<(), HarnessError> {
        let pair_seed = derive_seed(plan.seed, stream::SESSION, session_idx);
        let mut rng = rng_for(pair_seed, stream::KEYS, 0);
        let pair = if relayed {
            let entry = &non_co_mix[(session_idx as usize) % non_co_mix.len()];
            let pf_p = generator.config().profile(&entry.prover)?.clone();
            let pf_v = generator.config().profile(&entry.verifier)?.clone();
            generator.noncopresent_pair(
                &pf_p,
                &pf_v,
                entry.adjacent,
                pair_seed,
                format!("s{session_idx}"),
            )
        } else {
            let pf = &profiles[(session_idx as usize) % profiles.len()];
            generator.copresent_pair(pf, pair_seed, format!("s{session_idx}"))
        };

        let key = MacKey::from_rng(&mut rng);
        let mut prover_sample = pair.prover.clone();
        let mut verifier_sample = pair.verifier.clone();
        if let Some(tone) = &plan.probe {
            // The verifier always hears its own probe; a co-located prover
            // hears it too, a relayed one does not.
            verifier_sample = emit_probe_tone(&verifier_sample, tone);
            if !relayed {
                prover_sample = emit_probe_tone(&prover_sample, tone);
            }
        }
        let prover = Prover {
            key: key.clone(),
            sample: prover_sample,
        };
        let verifier = Verifier {
            key: None,
            sample: verifier_sample,
            radio_history: vec![],
        };
        let comparator = Comparator {
            prover_key: key,
            verifier_key: None,
            placement: ComparatorPlacement::IntegratedWithVerifier,
        };
        let attacker = relayed.then(|| RelayAttacker {
            attack: plan.attack.clone(),
            tamper,
            force: plan.force,
            ..RelayAttacker::default()
        });

        bucket.sessions += 1;
        match run_session(
            &prover,
            &verifier,
            &comparator,
            attacker.as_ref(),
            model,
            &catalog,
            &mut rng,
        ) {
            Ok(t) => {
                if t.verdict.accepted() {
                    bucket.accepted += 1;
                }
                if !t.mac_valid {
                    bucket.mac_invalid += 1;
                }
            }
            Err(SessionError::Timeout(_)) => bucket.timeouts += 1,
            Err(e) => return Err(e.into()),
        }
        Ok(())
    };

    let mut idx = 0u64;
    for _ in 0..plan.benign_sessions {
        run_one(&mut report.benign, idx, false, Tamper::None)?;
        idx += 1;
    }
    for _ in 0..plan.relay_sessions {
        run_one(&mut report.relay, idx, true, Tamper::None)?;
        idx += 1;
    }
    let forgeries = [
        Tamper::FlipResponseBit,
        Tamper::ForgeResponse,
        Tamper::RewriteProverContext,
    ];
    for i in 0..plan.forged_sessions {
        run_one(
            &mut report.forged,
            idx,
            true,
            forgeries[i % forgeries.len()],
        )?;
        idx += 1;
    }
    Ok(report)
}
