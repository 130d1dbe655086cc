#include "lux/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "lux/analytic.hpp"
#include "lux/errors.hpp"
#include "lux/oracle.hpp"
#include "parallel.hpp"

namespace lux {

const char* to_string(RegimeLabel label) {
    switch (label) {
        case RegimeLabel::Infeasible: return "infeasible";
        case RegimeLabel::BangBang: return "bang_bang";
        case RegimeLabel::BangSingularBang: return "bang_singular_bang";
        case RegimeLabel::SingularToDark: return "singular_to_dark";
        case RegimeLabel::ConstantMax: return "constant_max";
        case RegimeLabel::Unresolved: return "unresolved";
    }
    return "?";
}

namespace {

RegimeLabel label_of(StructureKind k) {
    switch (k) {
        case StructureKind::BangBang: return RegimeLabel::BangBang;
        case StructureKind::BangSingularBang: return RegimeLabel::BangSingularBang;
        case StructureKind::SingularToDark: return RegimeLabel::SingularToDark;
        case StructureKind::ConstantMax: return RegimeLabel::ConstantMax;
    }
    return RegimeLabel::Unresolved;
}

// The washout inequality in dimensional form, evaluated exactly as
// written so the Infeasible region of a scan is a pure comparison with
// no solver noise on top.
bool dimensionally_infeasible(const PhysicalParams& p) {
    return *p.nu_bar <= *p.kappa * p.rho * p.T_cal / p.T_light;
}

ShootingInit init_from(const CandidateSolution& c) {
    ShootingInit init;
    if (c.status != SolveStatus::Valid && c.status != SolveStatus::ConvergedInvalid) {
        return init;
    }
    const Unknowns& q = c.unknowns;
    auto put = [](std::optional<double>& slot, double v) {
        if (std::isfinite(v)) slot = v;
    };
    put(init.y0, q.y0);
    put(init.t01, q.t01);
    put(init.t0s, q.t0s);
    put(init.ts1, q.ts1);
    put(init.t10, q.t10);
    return init;
}

const CandidateSolution* pick_winner(const std::vector<CandidateSolution>& attempts) {
    const CandidateSolution* winner = nullptr;
    for (const auto& c : attempts) {
        if (c.status != SolveStatus::Valid) continue;
        if (!winner) {
            winner = &c;
            continue;
        }
        const double diff = c.objective - winner->objective;
        if (diff > 1e-9) {
            winner = &c;
        } else if (std::abs(diff) <= 1e-9 &&
                   arc_count(c.structure) < arc_count(winner->structure)) {
            winner = &c;
        }
    }
    return winner;
}

// best_solution with optional per-structure warm starts from a
// neighbouring cell; a cold lattice retry backs up every failed warm try.
BestSolution best_with_warm(const ScaledParams& sp, const BestSolution* prev) {
    BestSolution result;
    const StructureKind all[] = {StructureKind::BangBang, StructureKind::BangSingularBang,
                                 StructureKind::SingularToDark, StructureKind::ConstantMax};
    for (StructureKind k : all) {
        ShootingInit init;
        if (prev) {
            for (const auto& a : prev->attempts) {
                if (a.structure == k) init = init_from(a);
            }
        }
        const bool warm = init.t01 || init.t0s || init.ts1 || init.t10;
        CandidateSolution c = solve_candidate(k, sp, init);
        if (warm && c.status != SolveStatus::Valid &&
            c.status != SolveStatus::Inadmissible) {
            // A warm seed replaces the lattice, and it can converge onto a
            // rejected root the lattice never visits (the lit-arc
            // equilibrium family), so any non-valid warm outcome gets a
            // cold backup and the better-ranked attempt is kept.
            CandidateSolution cold = solve_candidate(k, sp, ShootingInit{});
            const auto rank = [](SolveStatus s) {
                if (s == SolveStatus::Valid) return 2;
                if (s == SolveStatus::ConvergedInvalid) return 1;
                return 0;
            };
            if (rank(cold.status) > rank(c.status)) c = std::move(cold);
        }
        result.attempts.push_back(std::move(c));
    }
    if (const auto* w = pick_winner(result.attempts)) {
        result.found = true;
        result.best = *w;
    }
    return result;
}

// One retry seeded by a small grid oracle, used when the lattice finds
// no validated candidate.
std::optional<CandidateSolution> oracle_retry(const ScaledParams& sp) {
    try {
        OracleConfig cfg;
        cfg.n_time = 600;
        cfg.n_state = 300;
        cfg.u_levels = 11;
        cfg.y0_scan = 24;
        cfg.threads = 1;
        const auto est = estimate_switches(dp_optimize(sp, cfg), sp);
        if (est.recognized) {
            auto c = solve_candidate(est.structure, sp, est.init);
            if (c.status == SolveStatus::Valid) return c;
        }
    } catch (const Error&) {
    }
    return std::nullopt;
}

ClassifyResult classify_scaled(const ScaledParams& sp, const BestSolution* prev,
                               BestSolution* chain) {
    ClassifyResult res;
    BestSolution best = best_with_warm(sp, prev);
    if (chain) *chain = best;
    if (!best.found) {
        res.used_oracle_retry = true;
        if (const auto c = oracle_retry(sp)) {
            res.label = label_of(c->structure);
            res.objective = c->objective;
            res.y0 = c->unknowns.y0;
            res.residual_norm = c->residual_norm;
            return res;
        }
        res.label = RegimeLabel::Unresolved;
        return res;
    }
    res.label = label_of(best.best.structure);
    res.objective = best.best.objective;
    res.y0 = best.best.unknowns.y0;
    res.residual_norm = best.best.residual_norm;
    return res;
}

// ----------------------------------------------------- boundary tracing

using Point = std::pair<double, double>;

long long quantize(double v) { return std::llround(v * 1e9); }

std::vector<std::vector<Point>> chain_segments(std::vector<std::pair<Point, Point>> segs) {
    std::map<std::pair<long long, long long>, std::vector<size_t>> at;
    for (size_t i = 0; i < segs.size(); ++i) {
        at[{quantize(segs[i].first.first), quantize(segs[i].first.second)}].push_back(i);
        at[{quantize(segs[i].second.first), quantize(segs[i].second.second)}].push_back(i);
    }
    std::vector<bool> used(segs.size(), false);
    std::vector<std::vector<Point>> chains;
    for (size_t i = 0; i < segs.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        std::vector<Point> chain{segs[i].first, segs[i].second};
        bool grew = true;
        while (grew) {
            grew = false;
            const Point& tail = chain.back();
            for (size_t j : at[{quantize(tail.first), quantize(tail.second)}]) {
                if (used[j]) continue;
                used[j] = true;
                chain.push_back(quantize(segs[j].first.first) == quantize(tail.first) &&
                                        quantize(segs[j].first.second) == quantize(tail.second)
                                    ? segs[j].second
                                    : segs[j].first);
                grew = true;
                break;
            }
        }
        chains.push_back(std::move(chain));
    }
    return chains;
}

std::vector<BoundaryCurve> trace_boundaries(const ScanConfig& cfg,
                                            const std::vector<ScanCell>& cells) {
    auto cell = [&](int i, int j) -> const ScanCell& { return cells[j * cfg.nu_count + i]; };
    std::set<RegimeLabel> labels;
    for (const auto& c : cells) labels.insert(c.label);

    std::vector<BoundaryCurve> curves;
    for (RegimeLabel L : labels) {
        std::vector<std::pair<Point, Point>> segs;
        for (int j = 0; j + 1 < cfg.rho_count; ++j) {
            for (int i = 0; i + 1 < cfg.nu_count; ++i) {
                // Corners of the marching square, cell centers in value space.
                const ScanCell& c00 = cell(i, j);
                const ScanCell& c10 = cell(i + 1, j);
                const ScanCell& c01 = cell(i, j + 1);
                const ScanCell& c11 = cell(i + 1, j + 1);
                const bool b00 = c00.label == L, b10 = c10.label == L;
                const bool b01 = c01.label == L, b11 = c11.label == L;
                const int idx = (b00 ? 1 : 0) | (b10 ? 2 : 0) | (b01 ? 4 : 0) | (b11 ? 8 : 0);
                if (idx == 0 || idx == 15) continue;
                const Point south{0.5 * (c00.nu_bar + c10.nu_bar), c00.rho};
                const Point north{0.5 * (c01.nu_bar + c11.nu_bar), c01.rho};
                const Point west{c00.nu_bar, 0.5 * (c00.rho + c01.rho)};
                const Point east{c10.nu_bar, 0.5 * (c10.rho + c11.rho)};
                auto add = [&](Point a, Point b) { segs.emplace_back(a, b); };
                switch (idx) {
                    case 1: case 14: add(west, south); break;
                    case 2: case 13: add(south, east); break;
                    case 3: case 12: add(west, east); break;
                    case 4: case 11: add(west, north); break;
                    case 6: case 9: add(south, north); break;
                    case 7: case 8: add(north, east); break;
                    case 5: add(west, south); add(north, east); break;
                    case 10: add(west, north); add(south, east); break;
                }
            }
        }
        if (segs.empty()) continue;
        BoundaryCurve curve;
        curve.label = L;
        curve.polylines = chain_segments(std::move(segs));
        curves.push_back(std::move(curve));
    }
    return curves;
}

}  // namespace

ClassifyResult classify(const PhysicalParams& p) {
    validate(p);
    if (!p.nu_bar || !p.kappa) {
        throw InvalidParams("classify needs nu_bar and kappa; run resolve_uptake first");
    }
    ClassifyResult res;
    if (dimensionally_infeasible(p)) {
        res.label = RegimeLabel::Infeasible;
        return res;
    }
    return classify_scaled(scale(p), nullptr, nullptr);
}

ScanResult scan(const ScanConfig& cfg) {
    if (cfg.nu_count < 2 || cfg.rho_count < 2) {
        throw InvalidParams("scan: need at least a 2x2 grid");
    }
    ScanResult result;
    result.config = cfg;
    result.cells.resize(static_cast<size_t>(cfg.nu_count) * cfg.rho_count);

    auto nu_at = [&](int i) {
        return cfg.nu_min + (cfg.nu_max - cfg.nu_min) * i / (cfg.nu_count - 1);
    };
    auto rho_at = [&](int j) {
        return cfg.rho_min + (cfg.rho_max - cfg.rho_min) * j / (cfg.rho_count - 1);
    };

    auto run_cell = [&](const PhysicalParams& p, const BestSolution* prev,
                        ScanCell& out) -> std::optional<BestSolution> {
        out.nu_bar = *p.nu_bar;
        out.rho = p.rho;
        if (dimensionally_infeasible(p)) {
            out.label = RegimeLabel::Infeasible;
            return std::nullopt;
        }
        try {
            const ScaledParams sp = scale(p);
            BestSolution chain;
            const ClassifyResult cr = classify_scaled(sp, prev, &chain);
            out.label = cr.label;
            out.objective = cr.objective;
            out.y0 = cr.y0;
            out.residual_norm = cr.residual_norm;
            if (chain.found) return chain;
        } catch (const InfeasibleError&) {
            out.label = RegimeLabel::Infeasible;
        } catch (const Error&) {
            out.label = RegimeLabel::Unresolved;
        }
        return std::nullopt;
    };

    detail::parallel_for(cfg.rho_count, cfg.threads, [&](int j) {
        std::optional<BestSolution> prev;
        for (int i = 0; i < cfg.nu_count; ++i) {
            PhysicalParams p = cfg.base;
            p.nu_bar = nu_at(i);
            p.rho = rho_at(j);
            ScanCell& cell = result.cells[static_cast<size_t>(j) * cfg.nu_count + i];
            prev = run_cell(p, prev ? &*prev : nullptr, cell);
        }
    });

    for (int j = 0; j < cfg.rho_count; ++j) {
        for (int i = 0; i < cfg.nu_count; ++i) {
            ScanCell& c = result.cells[static_cast<size_t>(j) * cfg.nu_count + i];
            if (c.label == RegimeLabel::Unresolved) ++result.unresolved_count;
            int neighbours = 0, disagree = 0;
            auto look = [&](int ii, int jj) {
                if (ii < 0 || jj < 0 || ii >= cfg.nu_count || jj >= cfg.rho_count) return;
                ++neighbours;
                if (result.cells[static_cast<size_t>(jj) * cfg.nu_count + ii].label != c.label) {
                    ++disagree;
                }
            };
            look(i - 1, j);
            look(i + 1, j);
            look(i, j - 1);
            look(i, j + 1);
            if (neighbours > 0 && disagree == neighbours) {
                c.suspect = true;
                ++result.suspect_count;
            }
        }
    }

    result.boundaries = trace_boundaries(cfg, result.cells);

    if (cfg.audit_determinism) {
        // Re-run a spread of cells without warm starts; labels must agree.
        result.determinism_ok = true;
        const int total = cfg.nu_count * cfg.rho_count;
        for (int s = total / 8; s < total; s += std::max(1, total / 7)) {
            const int i = s % cfg.nu_count, j = s / cfg.nu_count;
            PhysicalParams p = cfg.base;
            p.nu_bar = nu_at(i);
            p.rho = rho_at(j);
            ScanCell cold;
            run_cell(p, nullptr, cold);
            if (cold.label != result.cells[static_cast<size_t>(j) * cfg.nu_count + i].label) {
                result.determinism_ok = false;
            }
        }
    }
    return result;
}

}  // namespace lux
