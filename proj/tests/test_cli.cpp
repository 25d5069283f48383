#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hpmp/problem_file.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

class Workspace {
 public:
  Workspace() {
    dir_ = fs::temp_directory_path() / ("hpmp-cli-" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Run run(const std::string& args, const std::string& env = "") const {
    const std::string log = path("stdout.txt");
    const std::string cmd = env + " '" + std::string(HPMP_CLI) + "' " + args + " > '" + log + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, hpmp::read_text(log)};
  }

  void emit(const std::string& name) const {
    const Run r = run("catalog emit " + name + " --out " + path(name + ".prob") + " --trajectory-out " +
                      path(name + ".traj"));
    REQUIRE(r.code == 0);
  }

  std::string inputs(const std::string& name) const {
    return "--problem " + path(name + ".prob") + " --trajectory " + path(name + ".traj");
  }

 private:
  fs::path dir_;
};

}  // namespace

TEST_CASE("catalog list names every built-in") {
  Workspace ws;
  const Run r = ws.run("catalog list");
  CHECK(r.code == 0);
  for (const char* name : {"LQ1", "SLACK1", "CON1", "MIX1"}) CHECK(r.out.find(name) != std::string::npos);
  CHECK(ws.run("catalog emit NOPE").code == 2);
}

TEST_CASE("certify an emitted built-in") {
  Workspace ws;
  ws.emit("LQ1");
  const Run r = ws.run("certify " + ws.inputs("LQ1") + " --certificate " + ws.path("lq1.cert"));
  CHECK(r.code == 0);
  CHECK(fs::exists(ws.path("lq1.cert")));
  const Run again = ws.run("certify " + ws.inputs("LQ1") + " --load " + ws.path("lq1.cert"));
  CHECK(again.code == 0);
  // the negative limit adjoint is rejected by the sign-constrained variant
  CHECK(ws.run("certify " + ws.inputs("LQ1") + " --variant Thm31 --h 10,20").code == 1);
}

TEST_CASE("check reports unit slack on SLACK1") {
  Workspace ws;
  ws.emit("SLACK1");
  const Run r = ws.run("check " + ws.inputs("SLACK1"));
  CHECK(r.code == 0);
  CHECK(r.out.find("0,1,1") != std::string::npos);
}

TEST_CASE("qualify MIX1 finds a disjoint witness") {
  Workspace ws;
  ws.emit("MIX1");
  const Run r = ws.run("qualify " + ws.inputs("MIX1") + " --t 3");
  CHECK(r.code == 0);
  CHECK(r.out.find("outcome: Disjoint") != std::string::npos);
  CHECK(r.out.find("witness: 0 1") != std::string::npos);
}

TEST_CASE("malformed inputs exit with 2") {
  Workspace ws;
  ws.emit("LQ1");
  hpmp::write_text(ws.path("bad.prob"), "format horizon-pmp-problem 1\nn one\n");
  const Run r = ws.run("check --problem " + ws.path("bad.prob") + " --trajectory " + ws.path("LQ1.traj"));
  CHECK(r.code == 2);
  CHECK(r.out.find("line 2") != std::string::npos);
  CHECK(ws.run("check --problem " + ws.path("missing.prob") + " --trajectory " + ws.path("LQ1.traj")).code == 2);
  CHECK(ws.run("sweep " + ws.inputs("LQ1")).code == 2);
  CHECK(ws.run("frobnicate").code == 2);
}

TEST_CASE("sweep output is byte-identical across runs") {
  Workspace ws;
  ws.emit("CON1");
  const std::string base = "sweep " + ws.inputs("CON1") + " --h 10,20,40,80,159 --csv ";
  const Run a = ws.run(base + ws.path("a.csv"));
  const Run b = ws.run(base + ws.path("b.csv") + " --serial");
  CHECK(a.code == 0);
  CHECK(b.code == 0);
  CHECK(hpmp::read_text(ws.path("a.csv")) == hpmp::read_text(ws.path("b.csv")));
  CHECK(hpmp::read_text(ws.path("a.csv.profile.csv")) == hpmp::read_text(ws.path("b.csv.profile.csv")));
}

TEST_CASE("HORIZON_PMP_TOL sets the verification tolerance") {
  Workspace ws;
  ws.emit("SLACK1");
  ws.emit("LQ1");
  CHECK(ws.run("certify " + ws.inputs("SLACK1") + " --h 4,8,12", "HORIZON_PMP_TOL=1e-8").code == 0);
  CHECK(ws.run("certify " + ws.inputs("LQ1") + " --h 10,20,40,80", "HORIZON_PMP_TOL=1e-30").code == 1);
  CHECK(ws.run("certify " + ws.inputs("LQ1") + " --h 10,20,40,80 --tol 1e-6", "HORIZON_PMP_TOL=1e-30").code == 0);
  CHECK(ws.run("certify " + ws.inputs("SLACK1"), "HORIZON_PMP_TOL=abc").code == 2);
}
