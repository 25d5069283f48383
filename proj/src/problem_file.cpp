#include "hpmp/problem_file.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "detail/text.hpp"

namespace hpmp {

namespace {

using detail::Cursor;
using detail::Line;
using detail::parse_count;
using detail::parse_number;
using detail::tokenize;

constexpr const char* kProblemHeader = "horizon-pmp-problem";
constexpr const char* kTrajectoryHeader = "horizon-pmp-trajectory";

struct Issue {
  std::optional<std::size_t> stage;
  std::string field;
  std::string what;
};

std::optional<Issue> shape_issue(const StageData& s, std::size_t n, std::size_t d, std::size_t m_i,
                                 std::size_t m_e, std::optional<std::size_t> stage) {
  const auto N = static_cast<Eigen::Index>(n);
  const auto D = static_cast<Eigen::Index>(d);
  const auto check = [&](const Eigen::MatrixXd& m, Eigen::Index r, Eigen::Index c,
                          const char* field) -> std::optional<Issue> {
    if (m.rows() != r || m.cols() != c) {
      return Issue{stage, field, fmt::format("shape {}x{}, expected {}x{}", m.rows(), m.cols(), r, c)};
    }
    return std::nullopt;
  };
  const auto checkv = [&](const Eigen::VectorXd& v, Eigen::Index r,
                          const char* field) -> std::optional<Issue> {
    if (v.size() != r) return Issue{stage, field, fmt::format("length {}, expected {}", v.size(), r)};
    return std::nullopt;
  };
  for (auto issue : {check(s.A, N, N, "A"), check(s.B, N, D, "B"), checkv(s.c, N, "c"),
                     check(s.Q, N, N, "Q"), check(s.R, D, D, "R"),
                     check(s.G, static_cast<Eigen::Index>(m_i), D, "G"),
                     checkv(s.g0, static_cast<Eigen::Index>(m_i), "g0"),
                     check(s.E, static_cast<Eigen::Index>(m_e), D, "E"),
                     checkv(s.e0, static_cast<Eigen::Index>(m_e), "e0")}) {
    if (issue) return issue;
  }
  return std::nullopt;
}

std::optional<Issue> first_issue(const ProblemFile& f) {
  if (f.n == 0) return Issue{std::nullopt, "n", "must be at least 1"};
  if (f.d == 0) return Issue{std::nullopt, "d", "must be at least 1"};
  if (f.horizon < 2) return Issue{std::nullopt, "horizon", "must be at least 2"};
  if (!(f.beta > 0.0) || !std::isfinite(f.beta)) return Issue{std::nullopt, "beta", "must be positive"};
  if (static_cast<std::size_t>(f.sigma.size()) != f.n) {
    return Issue{std::nullopt, "sigma", fmt::format("length {}, expected {}", f.sigma.size(), f.n)};
  }
  if (f.state_box) {
    if (static_cast<std::size_t>(f.state_box->lower.size()) != f.n) {
      return Issue{std::nullopt, "state_lower", "length must equal n"};
    }
    if (static_cast<std::size_t>(f.state_box->upper.size()) != f.n) {
      return Issue{std::nullopt, "state_upper", "length must equal n"};
    }
  }
  const std::size_t m_i = f.inequality_count();
  const std::size_t m_e = f.equality_count();
  switch (f.controls) {
    case ControlVariant::Interior:
      if (m_i + m_e > 0) return Issue{std::nullopt, "controls", "interior controls carry no G or E rows"};
      break;
    case ControlVariant::Inequalities:
      if (m_i == 0 || m_e > 0) {
        return Issue{std::nullopt, "controls", "inequalities need G rows and no E rows"};
      }
      break;
    case ControlVariant::Mixed:
      if (m_i == 0 || m_e == 0) return Issue{std::nullopt, "controls", "mixed needs both G and E rows"};
      break;
  }
  if (auto issue = shape_issue(f.rule, f.n, f.d, m_i, m_e, std::nullopt)) return issue;
  for (const auto& [t, patch] : f.stages) {
    if (t > f.horizon) return Issue{t, "stage", fmt::format("stage {} is beyond H_max = {}", t, f.horizon)};
    if (auto issue = shape_issue(f.stage(t), f.n, f.d, m_i, m_e, t)) return issue;
  }
  return std::nullopt;
}

void apply(StageData& s, const StagePatch& p) {
  if (p.A) s.A = *p.A;
  if (p.B) s.B = *p.B;
  if (p.c) s.c = *p.c;
  if (p.Q) s.Q = *p.Q;
  if (p.R) s.R = *p.R;
  if (p.G) s.G = *p.G;
  if (p.g0) s.g0 = *p.g0;
  if (p.E) s.E = *p.E;
  if (p.e0) s.e0 = *p.e0;
}

// Parses one block key into the patch; returns false for keys that are not blocks.
bool parse_block(Cursor& cur, const Line& line, StagePatch& patch) {
  const std::string& key = line.tokens[0];
  const auto matrix = [&](std::optional<Eigen::MatrixXd>& slot) {
    if (slot) throw ParseError(line.number, key, "given twice");
    slot = cur.matrix_block(line, key);
  };
  const auto vector = [&](std::optional<Eigen::VectorXd>& slot) {
    if (slot) throw ParseError(line.number, key, "given twice");
    slot = cur.inline_vector(line, key);
  };
  if (key == "A") matrix(patch.A);
  else if (key == "B") matrix(patch.B);
  else if (key == "Q") matrix(patch.Q);
  else if (key == "R") matrix(patch.R);
  else if (key == "G") matrix(patch.G);
  else if (key == "E") matrix(patch.E);
  else if (key == "c") vector(patch.c);
  else if (key == "g0") vector(patch.g0);
  else if (key == "e0") vector(patch.e0);
  else return false;
  return true;
}

std::string format_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  std::string out;
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    if (i > 0) out += ' ';
    out += fmt::format("{:.17g}", row(i));
  }
  return out;
}

void write_matrix(std::string& out, const char* name, const Eigen::MatrixXd& m,
                  const char* indent = "") {
  out += fmt::format("{}{} {} {}\n", indent, name, m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) out += fmt::format("{}{}\n", indent, format_row(m.row(r)));
}

void write_vector(std::string& out, const char* name, const Eigen::VectorXd& v,
                  const char* indent = "") {
  out += fmt::format("{}{}", indent, name);
  if (v.size() > 0) out += ' ' + format_row(v.transpose());
  out += '\n';
}

void write_patch(std::string& out, const StagePatch& p) {
  const char* in = "  ";
  if (p.A) write_matrix(out, "A", *p.A, in);
  if (p.B) write_matrix(out, "B", *p.B, in);
  if (p.c) write_vector(out, "c", *p.c, in);
  if (p.Q) write_matrix(out, "Q", *p.Q, in);
  if (p.R) write_matrix(out, "R", *p.R, in);
  if (p.G) write_matrix(out, "G", *p.G, in);
  if (p.g0) write_vector(out, "g0", *p.g0, in);
  if (p.E) write_matrix(out, "E", *p.E, in);
  if (p.e0) write_vector(out, "e0", *p.e0, in);
}

}  // namespace

StageData ProblemFile::stage(std::size_t t) const {
  StageData s = rule;
  if (const auto it = stages.find(t); it != stages.end()) apply(s, it->second);
  return s;
}

void ProblemFile::validate() const {
  if (const auto issue = first_issue(*this)) {
    const std::string where = issue->stage ? fmt::format(" at stage {}", *issue->stage) : "";
    throw PreconditionError(fmt::format("problem file field '{}'{}: {}", issue->field, where, issue->what));
  }
}

ProblemSpec to_problem(const ProblemFile& file) {
  file.validate();
  struct Tables {
    std::vector<StageData> stages;
    std::vector<double> discount;
    StageData rule;
    double beta;

    const StageData& at(std::size_t t) const { return t < stages.size() ? stages[t] : rule; }
    double weight(std::size_t t) const {
      return t < discount.size() ? discount[t] : std::pow(beta, static_cast<double>(t));
    }
  };
  auto tables = std::make_shared<Tables>();
  tables->rule = file.rule;
  tables->beta = file.beta;
  for (std::size_t t = 0; t <= file.horizon; ++t) {
    tables->stages.push_back(file.stage(t));
    tables->discount.push_back(std::pow(file.beta, static_cast<double>(t)));
  }

  ProblemSpec spec;
  spec.name = file.name;
  spec.n = file.n;
  spec.d = file.d;
  spec.sigma = file.sigma;
  spec.kind = file.kind;
  spec.horizon = file.horizon;
  spec.state_set = file.state_box;
  spec.controls.variant = file.controls;
  spec.controls.inequality_count = file.inequality_count();
  spec.controls.equality_count = file.equality_count();
  if (spec.controls.inequality_count > 0) {
    spec.controls.inequalities = [tables](std::size_t t, const Eigen::VectorXd& u) -> Eigen::VectorXd {
      const StageData& s = tables->at(t);
      return s.G * u + s.g0;
    };
    spec.analytic.inequality_jacobian = [tables](std::size_t t, const Eigen::VectorXd&) {
      return Eigen::MatrixXd(tables->at(t).G);
    };
  }
  if (spec.controls.equality_count > 0) {
    spec.controls.equalities = [tables](std::size_t t, const Eigen::VectorXd& u) -> Eigen::VectorXd {
      const StageData& s = tables->at(t);
      return s.E * u + s.e0;
    };
    spec.analytic.equality_jacobian = [tables](std::size_t t, const Eigen::VectorXd&) {
      return Eigen::MatrixXd(tables->at(t).E);
    };
  }
  spec.dynamics = [tables](std::size_t t, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u) -> Eigen::VectorXd {
    const StageData& s = tables->at(t);
    return s.A * x + s.B * u + s.c;
  };
  spec.criterion = [tables](std::size_t t, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    const StageData& s = tables->at(t);
    return -tables->weight(t) * (x.dot(s.Q * x) + u.dot(s.R * u));
  };
  spec.analytic.dynamics_state = [tables](std::size_t t, const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::MatrixXd(tables->at(t).A);
  };
  spec.analytic.dynamics_control = [tables](std::size_t t, const Eigen::VectorXd&,
                                            const Eigen::VectorXd&) {
    return Eigen::MatrixXd(tables->at(t).B);
  };
  spec.analytic.criterion_state = [tables](std::size_t t, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd&) -> Eigen::VectorXd {
    const StageData& s = tables->at(t);
    return -tables->weight(t) * (s.Q + s.Q.transpose()) * x;
  };
  spec.analytic.criterion_control = [tables](std::size_t t, const Eigen::VectorXd&,
                                             const Eigen::VectorXd& u) -> Eigen::VectorXd {
    const StageData& s = tables->at(t);
    return -tables->weight(t) * (s.R + s.R.transpose()) * u;
  };
  spec.regularity.lower_semicontinuous = true;
  spec.regularity.frechet_differentiable = true;
  spec.validate();
  return spec;
}

ProblemFile parse_problem_file(const std::string& text) {
  Cursor cur(tokenize(text));
  cur.expect_header(kProblemHeader);

  ProblemFile file;
  StagePatch rule;
  std::set<std::string> seen;
  std::optional<Eigen::VectorXd> lower;
  std::optional<Eigen::VectorXd> upper;
  std::map<std::string, std::size_t> where;  // field -> line, for shape errors
  std::map<std::size_t, std::size_t> stage_line;

  const auto scalar = [](const Line& line) -> const std::string& {
    if (line.tokens.size() != 2) throw ParseError(line.number, line.tokens[0], "expected one value");
    return line.tokens[1];
  };

  while (!cur.done()) {
    const Line& line = cur.next("key");
    const std::string& key = line.tokens[0];
    if (key == "stage") {
      if (line.tokens.size() != 2) throw ParseError(line.number, key, "expected 'stage <t>'");
      const std::size_t t = parse_count(line.tokens[1], line.number, key);
      if (file.stages.count(t) > 0) throw ParseError(line.number, key, fmt::format("stage {} given twice", t));
      StagePatch patch;
      for (;;) {
        const Line& inner = cur.next("end");
        if (inner.tokens[0] == "end") {
          if (inner.tokens.size() != 1) throw ParseError(inner.number, "end", "unexpected tokens");
          break;
        }
        if (!parse_block(cur, inner, patch)) {
          throw ParseError(inner.number, inner.tokens[0], "not allowed inside a stage block");
        }
      }
      file.stages.emplace(t, std::move(patch));
      stage_line[t] = line.number;
      continue;
    }
    if (key != "A" && key != "B" && key != "Q" && key != "R" && key != "G" && key != "E" &&
        key != "c" && key != "g0" && key != "e0" && seen.count(key) > 0) {
      throw ParseError(line.number, key, "given twice");
    }
    seen.insert(key);
    where[key] = line.number;
    if (parse_block(cur, line, rule)) continue;
    if (key == "name") {
      file.name = scalar(line);
    } else if (key == "n") {
      file.n = parse_count(scalar(line), line.number, key);
    } else if (key == "d") {
      file.d = parse_count(scalar(line), line.number, key);
    } else if (key == "horizon") {
      file.horizon = parse_count(scalar(line), line.number, key);
    } else if (key == "beta") {
      file.beta = parse_number(scalar(line), line.number, key);
    } else if (key == "kind") {
      const std::string& v = scalar(line);
      if (v == "equation") file.kind = SystemKind::Equation;
      else if (v == "inequation") file.kind = SystemKind::Inequation;
      else throw ParseError(line.number, key, fmt::format("unknown kind '{}'", v));
    } else if (key == "controls") {
      const std::string& v = scalar(line);
      if (v == "interior") file.controls = ControlVariant::Interior;
      else if (v == "inequalities") file.controls = ControlVariant::Inequalities;
      else if (v == "mixed") file.controls = ControlVariant::Mixed;
      else throw ParseError(line.number, key, fmt::format("unknown control set '{}'", v));
    } else if (key == "sigma") {
      file.sigma = cur.inline_vector(line, key);
    } else if (key == "state_lower") {
      lower = cur.inline_vector(line, key);
    } else if (key == "state_upper") {
      upper = cur.inline_vector(line, key);
    } else {
      throw ParseError(line.number, key, "unknown key");
    }
  }

  for (const char* required : {"n", "d", "kind", "controls", "horizon", "sigma", "A", "B"}) {
    if (seen.count(required) == 0) throw ParseError(cur.last_line(), required, "missing");
  }
  if (lower.has_value() != upper.has_value()) {
    throw ParseError(where[lower ? "state_lower" : "state_upper"], lower ? "state_upper" : "state_lower",
                     "state_lower and state_upper must be given together");
  }
  if (lower) file.state_box = StateBox{*lower, *upper};

  const auto N = static_cast<Eigen::Index>(file.n);
  const auto D = static_cast<Eigen::Index>(file.d);
  file.rule.A = *rule.A;
  file.rule.B = *rule.B;
  file.rule.c = rule.c.value_or(Eigen::VectorXd::Zero(N));
  file.rule.Q = rule.Q.value_or(Eigen::MatrixXd::Zero(N, N));
  file.rule.R = rule.R.value_or(Eigen::MatrixXd::Zero(D, D));
  file.rule.G = rule.G.value_or(Eigen::MatrixXd::Zero(0, D));
  file.rule.g0 = rule.g0.value_or(Eigen::VectorXd::Zero(file.rule.G.rows()));
  file.rule.E = rule.E.value_or(Eigen::MatrixXd::Zero(0, D));
  file.rule.e0 = rule.e0.value_or(Eigen::VectorXd::Zero(file.rule.E.rows()));

  if (const auto issue = first_issue(file)) {
    const std::size_t line =
        issue->stage ? stage_line[*issue->stage] : (where.count(issue->field) ? where[issue->field] : 0);
    const std::string what = issue->stage ? fmt::format("stage {}: {}", *issue->stage, issue->what) : issue->what;
    throw ParseError(line, issue->field, what);
  }
  return file;
}

std::string write_problem_file(const ProblemFile& file) {
  file.validate();
  std::string out = fmt::format("format {} 1\n", kProblemHeader);
  out += fmt::format("name {}\n", file.name);
  out += fmt::format("n {}\nd {}\n", file.n, file.d);
  out += fmt::format("kind {}\n", file.kind == SystemKind::Equation ? "equation" : "inequation");
  const char* controls = file.controls == ControlVariant::Interior       ? "interior"
                         : file.controls == ControlVariant::Inequalities ? "inequalities"
                                                                         : "mixed";
  out += fmt::format("controls {}\n", controls);
  out += fmt::format("horizon {}\n", file.horizon);
  out += fmt::format("beta {:.17g}\n", file.beta);
  write_vector(out, "sigma", file.sigma);
  if (file.state_box) {
    write_vector(out, "state_lower", file.state_box->lower);
    write_vector(out, "state_upper", file.state_box->upper);
  }
  write_matrix(out, "A", file.rule.A);
  write_matrix(out, "B", file.rule.B);
  write_vector(out, "c", file.rule.c);
  write_matrix(out, "Q", file.rule.Q);
  write_matrix(out, "R", file.rule.R);
  if (file.inequality_count() > 0) {
    write_matrix(out, "G", file.rule.G);
    write_vector(out, "g0", file.rule.g0);
  }
  if (file.equality_count() > 0) {
    write_matrix(out, "E", file.rule.E);
    write_vector(out, "e0", file.rule.e0);
  }
  for (const auto& [t, patch] : file.stages) {
    out += fmt::format("stage {}\n", t);
    write_patch(out, patch);
    out += "end\n";
  }
  return out;
}

Trajectory parse_trajectory_file(const std::string& text) {
  Cursor cur(tokenize(text));
  cur.expect_header(kTrajectoryHeader);
  std::optional<std::size_t> n;
  std::optional<std::size_t> d;
  std::optional<std::size_t> states_line;
  Trajectory traj;
  bool have_states = false;
  bool have_controls = false;

  const auto rows = [&](const Line& header, std::size_t width, const std::string& field) {
    if (header.tokens.size() != 2) throw ParseError(header.number, field, "expected '<name> <count>'");
    const std::size_t count = parse_count(header.tokens[1], header.number, field);
    std::vector<Eigen::VectorXd> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const Line& row = cur.next(field);
      if (row.tokens.size() != width) {
        throw ParseError(row.number, field,
                         fmt::format("entry {} has {} components, expected {}", i, row.tokens.size(), width));
      }
      Eigen::VectorXd v(static_cast<Eigen::Index>(width));
      for (std::size_t j = 0; j < width; ++j) {
        v(static_cast<Eigen::Index>(j)) = parse_number(row.tokens[j], row.number, field);
      }
      out.push_back(std::move(v));
    }
    return out;
  };

  while (!cur.done()) {
    const Line& line = cur.next("key");
    const std::string& key = line.tokens[0];
    if (key == "n" || key == "d") {
      auto& slot = key == "n" ? n : d;
      if (slot) throw ParseError(line.number, key, "given twice");
      if (line.tokens.size() != 2) throw ParseError(line.number, key, "expected one value");
      slot = parse_count(line.tokens[1], line.number, key);
      if (*slot == 0) throw ParseError(line.number, key, "must be at least 1");
    } else if (key == "states") {
      if (!n) throw ParseError(line.number, key, "n must precede states");
      if (have_states) throw ParseError(line.number, key, "given twice");
      traj.states = rows(line, *n, key);
      states_line = line.number;
      have_states = true;
    } else if (key == "controls") {
      if (!d) throw ParseError(line.number, key, "d must precede controls");
      if (have_controls) throw ParseError(line.number, key, "given twice");
      traj.controls = rows(line, *d, key);
      have_controls = true;
    } else {
      throw ParseError(line.number, key, "unknown key");
    }
  }
  if (!have_states) throw ParseError(cur.last_line(), "states", "missing");
  if (!have_controls) throw ParseError(cur.last_line(), "controls", "missing");
  if (traj.states.size() != traj.controls.size() + 1) {
    throw ParseError(*states_line, "states",
                     fmt::format("{} states for {} controls; states must number controls + 1",
                                 traj.states.size(), traj.controls.size()));
  }
  return traj;
}

std::string write_trajectory_file(const Trajectory& traj) {
  if (traj.states.empty() || traj.states.size() != traj.controls.size() + 1) {
    throw DimensionError("trajectory must hold one more state than controls");
  }
  std::string out = fmt::format("format {} 1\n", kTrajectoryHeader);
  const auto d = traj.controls.empty() ? Eigen::Index{1} : traj.controls.front().size();
  out += fmt::format("n {}\nd {}\n", traj.states.front().size(), d);
  out += fmt::format("states {}\n", traj.states.size());
  for (const auto& x : traj.states) out += format_row(x.transpose()) + '\n';
  out += fmt::format("controls {}\n", traj.controls.size());
  for (const auto& u : traj.controls) out += format_row(u.transpose()) + '\n';
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path));
  out << text;
  if (!out) throw Error(fmt::format("write to '{}' failed", path));
}

}  // namespace hpmp
