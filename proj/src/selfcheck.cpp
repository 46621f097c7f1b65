#include "ctcsum/selfcheck.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>

#include "ctcsum/ctc.hpp"
#include "ctcsum/decode.hpp"
#include "ctcsum/metrics.hpp"
#include "ctcsum/model.hpp"

namespace ctcsum {

namespace {

EmissionMatrix random_emissions(Rng& rng, std::size_t frames, std::size_t labels) {
  Matrix y(frames, labels);
  for (std::size_t t = 0; t < frames; ++t) {
    double sum = 0.0;
    for (double& v : y.row(t)) sum += (v = rng.uniform(0.05, 1.0));
    for (double& v : y.row(t)) v /= sum;
  }
  return EmissionMatrix(std::move(y));
}

LabelSequence random_target(Rng& rng, std::size_t length, std::size_t labels) {
  LabelSequence z(length);
  for (LabelId& v : z) v = 1 + static_cast<LabelId>(rng.below(labels - 1));
  return z;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

// Probability mass of every collapsed sequence, by enumerating all paths.
std::map<LabelSequence, double> collapsed_masses(const EmissionMatrix& y) {
  std::map<LabelSequence, double> mass;
  LabelSequence path(y.frames(), 0);
  for (;;) {
    double p = 1.0;
    for (std::size_t t = 0; t < path.size(); ++t) p *= y(t, path[t]);
    mass[collapse(path)] += p;
    std::size_t t = 0;
    while (t < path.size() && ++path[t] == y.labels()) path[t++] = 0;
    if (t == path.size()) break;
  }
  return mass;
}

std::size_t lcs_memoized(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) {
    if (i == a.size() || j == b.size()) return std::size_t{0};
    auto key = std::pair{i, j};
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::size_t r = a[i] == b[j] ? 1 + go(i + 1, j + 1) : std::max(go(i + 1, j), go(i, j + 1));
    return memo[key] = r;
  };
  return go(0, 0);
}

// Runs `instance(seed, detail)` for each seed; stops at the first failure.
SuiteResult run_suite(const std::string& name, std::uint64_t base_seed, std::size_t count,
                      const std::function<bool(std::uint64_t, std::string&)>& instance) {
  SuiteResult result;
  result.name = name;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t seed = base_seed + i;
    std::string detail;
    bool ok = false;
    try {
      ok = instance(seed, detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    ++result.instances;
    if (!ok) {
      result.passed = false;
      result.failing_seed = seed;
      result.detail = detail;
      break;
    }
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

bool ctc_oracle_instance(std::uint64_t seed, std::string& detail) {
  Rng rng = Rng(seed).split("ctc-oracle");
  const std::size_t frames = 1 + rng.below(6);
  const std::size_t labels = 2 + rng.below(3);
  const LabelSequence target = random_target(rng, rng.below(4), labels);
  const EmissionMatrix y = random_emissions(rng, frames, labels);
  const double dp = ctc_log_prob(y, target);
  const double brute = ctc_log_prob_bruteforce(y, target);
  if (dp == kLogZero && brute == kLogZero) return true;
  if (std::abs(dp - brute) <= 1e-9) return true;
  char buf[160];
  std::snprintf(buf, sizeof buf, "T=%zu L'=%zu U=%zu: recursion %.12g vs enumeration %.12g",
                frames, labels, target.size(), dp, brute);
  detail = buf;
  return false;
}

bool ctc_gradient_instance(std::uint64_t seed, std::string& detail) {
  Rng rng = Rng(seed).split("ctc-gradient");
  const std::size_t frames = 1 + rng.below(5);
  const std::size_t labels = 2 + rng.below(3);
  LabelSequence target;
  do {
    target = random_target(rng, rng.below(std::min<std::size_t>(frames, 3) + 1), labels);
  } while (!is_feasible(frames, target));
  Matrix logits(frames, labels);
  for (double& v : logits.values()) v = 1.5 * rng.normal();

  const CtcResult analytic = ctc_loss_and_grad(logits, target);
  auto enumerated_loss = [&](const Matrix& u) {
    return -ctc_log_prob_bruteforce(EmissionMatrix(softmax_rows(u)), target);
  };
  constexpr double kStep = 1e-5;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    Matrix plus = logits, minus = logits;
    plus.values()[i] += kStep;
    minus.values()[i] -= kStep;
    const double numeric = (enumerated_loss(plus) - enumerated_loss(minus)) / (2 * kStep);
    const double exact = analytic.grad_logits.values()[i];
    if (relative_error(exact, numeric) > 1e-5) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "logit %zu: analytic %.10g vs finite difference %.10g", i,
                    exact, numeric);
      detail = buf;
      return false;
    }
  }
  return true;
}

bool beam_instance(std::uint64_t seed, std::string& detail) {
  Rng rng = Rng(seed).split("beam-exhaustive");
  const std::size_t frames = 1 + rng.below(4);
  const std::size_t labels = 2 + rng.below(2);
  const EmissionMatrix y = random_emissions(rng, frames, labels);
  const auto masses = collapsed_masses(y);
  double best = 0.0;
  for (const auto& [seq, p] : masses) best = std::max(best, p);
  const DecodeResult beam = beam_decode(y, 64);
  auto it = masses.find(beam.labels);
  const double got = it == masses.end() ? 0.0 : it->second;
  if (got >= best - 1e-12) return true;
  char buf[160];
  std::snprintf(buf, sizeof buf, "beam picked mass %.12g, exhaustive best %.12g", got, best);
  detail = buf;
  return false;
}

bool lcs_instance(std::uint64_t seed, std::string& detail) {
  Rng rng = Rng(seed).split("lcs-oracle");
  const int alphabet = 1 + static_cast<int>(rng.below(4));
  auto draw = [&] {
    std::vector<int> v(rng.below(13));
    for (int& x : v) x = static_cast<int>(rng.below(alphabet));
    return v;
  };
  const std::vector<int> a = draw(), b = draw();
  const std::size_t dp = lcs_length(a, b);
  const std::size_t memo = lcs_memoized(a, b);
  if (dp == memo && lcs_length(b, a) == dp) return true;
  detail = "dynamic program " + std::to_string(dp) + " vs memoized " + std::to_string(memo);
  return false;
}

bool model_gradient_instance(std::uint64_t seed, std::string& detail) {
  Rng rng = Rng(seed).split("model-gradient");
  const ModelDims dims{6, 4, 3, 4, 2};
  ModelParams params = ModelParams::zeros(dims);
  for (auto& t : params.tensors())
    for (double& v : t.value->values()) v = 0.5 * rng.normal();
  LabelSequence input(6);
  for (LabelId& v : input) v = static_cast<LabelId>(rng.below(dims.input_vocab));
  const LabelSequence target = random_target(rng, 2 + rng.below(2), dims.output_labels);

  auto loss_of = [&](const ModelParams& p) {
    return ctc_loss_and_grad(forward(p, input).logits, target).loss;
  };
  ForwardResult fwd = forward(params, input);
  ModelParams grad = backward(params, fwd.cache, ctc_loss_and_grad(fwd.logits, target).grad_logits);

  auto p_tensors = params.tensors();
  auto g_tensors = grad.tensors();
  constexpr double kStep = 1e-4;
  for (std::size_t ti = 0; ti < p_tensors.size(); ++ti) {
    Matrix& w = *p_tensors[ti].value;
    for (int sample = 0; sample < 5; ++sample) {
      std::size_t idx = rng.below(w.size());
      if (ti == 0) idx = input[rng.below(input.size())] * w.cols() + rng.below(w.cols());
      const double saved = w.values()[idx];
      w.values()[idx] = saved + kStep;
      const double up = loss_of(params);
      w.values()[idx] = saved - kStep;
      const double down = loss_of(params);
      w.values()[idx] = saved;
      const double numeric = (up - down) / (2 * kStep);
      const double exact = g_tensors[ti].value->values()[idx];
      if (relative_error(exact, numeric) > 1e-4) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "%s[%zu]: analytic %.10g vs finite difference %.10g",
                      p_tensors[ti].name.c_str(), idx, exact, numeric);
        detail = buf;
        return false;
      }
    }
  }
  return true;
}

}  // namespace

std::vector<SuiteResult> run_selfcheck(const SelfcheckOptions& opts) {
  return {
      run_suite("ctc-oracle", opts.seed, opts.ctc_instances, ctc_oracle_instance),
      run_suite("ctc-gradient", opts.seed, opts.gradient_instances, ctc_gradient_instance),
      run_suite("beam-exhaustive", opts.seed, opts.beam_instances, beam_instance),
      run_suite("lcs-oracle", opts.seed, opts.lcs_instances, lcs_instance),
      run_suite("model-gradient", opts.seed, opts.model_instances, model_gradient_instance),
  };
}

std::string format_selfcheck(const std::vector<SuiteResult>& results) {
  std::string out;
  char line[256];
  for (const SuiteResult& r : results) {
    std::snprintf(line, sizeof line, "%-16s %s  %5zu instances  %7.3fs", r.name.c_str(),
                  r.passed ? "PASS" : "FAIL", r.instances, r.seconds);
    out += line;
    if (!r.passed) {
      std::snprintf(line, sizeof line, "  seed=%llu  %s",
                    static_cast<unsigned long long>(*r.failing_seed), r.detail.c_str());
      out += line;
    }
    out += '\n';
  }
  return out;
}

}  // namespace ctcsum
