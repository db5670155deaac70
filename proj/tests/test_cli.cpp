#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "diffuscope/io.hpp"

namespace fs = std::filesystem;
using diffuscope::io::json;

namespace {

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("diffuscope_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir / name) << text; }
  std::string read(const std::string& name) const { return diffuscope::io::read_text(dir / name); }

  // exit status of the CLI; stderr lands in err.txt
  int run(const std::string& args, const std::string& env = "") const {
    const std::string cmd = env + " " + DIFFUSCOPE_CLI + " " + args + " 2> " + path("err.txt") + " > " + path("out.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
};

const char* kK3 = R"({"labels":["a","b","c"],"edges":[{"i":0,"j":1,"w":1},{"i":0,"j":2,"w":1},{"i":1,"j":2,"w":1}]})";

}  // namespace

TEST_CASE("dff writes one field per scale and rejects bad input") {
  Workspace ws;
  ws.write("pts.csv", "x1\n-2\n-1.9\n2\n2.1\n");
  fs::create_directories(ws.dir / "out");
  CHECK(ws.run("dff --in " + ws.path("pts.csv") + " --t 0.1 --t 4 --out-dir " + ws.path("out")) == 0);
  CHECK(fs::exists(ws.dir / "out" / "dff_t0.1.csv"));
  CHECK(fs::exists(ws.dir / "out" / "dff_t4.csv"));
  CHECK(ws.read("out/dff_t4.csv").rfind("x1,value\n", 0) == 0);

  CHECK(ws.run("dff --in " + ws.path("missing.csv") + " --t 1 --out-dir " + ws.path("out")) == 2);
  CHECK(ws.run("dff --in " + ws.path("pts.csv") + " --t -1 --out-dir " + ws.path("out")) == 2);
  CHECK(ws.read("err.txt").find("--t") != std::string::npos);
  ws.write("bad.csv", "x1\n1\nfoo\n");
  CHECK(ws.run("dff --in " + ws.path("bad.csv") + " --t 1 --out-dir " + ws.path("out")) == 2);
  CHECK(ws.run("dff --in " + ws.path("pts.csv") + " --t 1 --out-dir " + ws.path("nowhere")) == 2);
  CHECK(ws.run("bogus") == 2);
  CHECK(ws.run("--help") == 0);
}

TEST_CASE("flow writes snapshots and a manifest") {
  Workspace ws;
  CHECK(ws.run("synth blobs --centers 0 0 3 0 1.5 2.5 --per-blob 20 --seed 4 --out " + ws.path("pts.csv")) == 0);
  fs::create_directories(ws.dir / "flow");
  CHECK(ws.run("flow --in " + ws.path("pts.csv") + " --t 0.2 --snapshots 6 --out-dir " + ws.path("flow")) == 0);
  const auto manifest = json::parse(ws.read("flow/manifest.json"));
  CHECK(manifest["t"] == 0.2);
  CHECK(manifest["snapshots"].size() == 6);
  CHECK(manifest["step"].get<double>() > 0.0);
  for (const auto& name : manifest["snapshots"]) CHECK(fs::exists(ws.dir / "flow" / name.get<std::string>()));
  const auto last = diffuscope::io::read_point_csv(ws.dir / "flow" / "snapshot_005.csv");
  CHECK(last.size() == 60);
}

TEST_CASE("dfv emits one column per scale") {
  Workspace ws;
  ws.write("net.json", kK3);
  ws.write("xi.json", R"({"probs":[0.2,0.3,0.5]})");
  CHECK(ws.run("dfv --net " + ws.path("net.json") + " --dist " + ws.path("xi.json") + " --t 0.01 --t 0.3 --out " +
               ws.path("dfv.csv")) == 0);
  std::istringstream in(ws.read("dfv.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("label,t=0.01", 0) == 0);
  CHECK(std::count(header.begin(), header.end(), ',') == 2);
  CHECK(ws.run("dfv --net " + ws.path("net.json") + " --t 0.5 --out " + ws.path("one.csv")) == 0);
  CHECK(ws.read("one.csv").rfind("label,value\n", 0) == 0);
  ws.write("xi2.json", R"({"probs":[0.5,0.5]})");
  CHECK(ws.run("dfv --net " + ws.path("net.json") + " --dist " + ws.path("xi2.json") + " --t 0.5 --out " +
               ws.path("x.csv")) == 2);
  CHECK_FALSE(fs::exists(ws.dir / "x.csv"));
}

TEST_CASE("wasserstein in both metrics") {
  Workspace ws;
  ws.write("a.csv", "x\n0\n2\n");
  ws.write("b.csv", "x\n1\n3\n");
  CHECK(ws.run("wasserstein --a " + ws.path("a.csv") + " --b " + ws.path("b.csv") + " --p 1 --out " + ws.path("w.json")) == 0);
  const auto w = json::parse(ws.read("w.json"));
  CHECK(w["cost"].get<double>() == doctest::Approx(1.0));
  CHECK(w["plan"].size() == 2);

  ws.write("net.json", R"({"labels":["a","b"],"edges":[{"i":0,"j":1,"w":1}]})");
  ws.write("xi.json", R"({"probs":[1,0]})");
  ws.write("zeta.json", R"({"probs":[0,1]})");
  CHECK(ws.run("wasserstein --net " + ws.path("net.json") + " --xi " + ws.path("xi.json") + " --zeta " +
               ws.path("zeta.json") + " --out " + ws.path("wn.json")) == 0);
  CHECK(json::parse(ws.read("wn.json"))["cost"].get<double>() == doctest::Approx(1.0));
  CHECK(ws.run("wasserstein --a " + ws.path("a.csv") + " --b " + ws.path("b.csv") + " --p 0.5 --out " + ws.path("x.json")) == 2);
  CHECK(ws.read("err.txt").find("--p") != std::string::npos);
}

TEST_CASE("stability output is independent of thread count") {
  Workspace ws;
  CHECK(ws.run("stability --family frechet --count 3 --seed 7 --threads 1 --out " + ws.path("s1.json")) == 0);
  CHECK(ws.run("stability report --family frechet --count 3 --seed 7 --out " + ws.path("s2.json"), "DIFFUSCOPE_THREADS=3") == 0);
  CHECK(ws.read("s1.json") == ws.read("s2.json"));
  const auto doc = json::parse(ws.read("s1.json"));
  CHECK(doc["reports"].size() == 3);
  CHECK(doc["summary"][0]["family"] == "frechet");
  CHECK(ws.run("stability --family bogus --out " + ws.path("s3.json")) == 2);
  CHECK(ws.run("stability --count 1 --out " + ws.path("s3.json"), "DIFFUSCOPE_THREADS=zero") == 2);
}

TEST_CASE("co-occurrence and biomarker pipeline") {
  Workspace ws;
  CHECK(ws.run("synth planted --per-class 15 --seed 2 --out " + ws.path("tab.csv") + " --labels-out " +
               ws.path("lab.csv") + " --reference-out " + ws.path("ref.csv")) == 0);
  CHECK(ws.run("cooccur build --alpha 0.1 --in " + ws.path("ref.csv") + " --out " + ws.path("net.json")) == 0);
  const auto net = diffuscope::io::read_network_json(ws.dir / "net.json");
  CHECK(net.is_connected());

  CHECK(ws.run("biomarker train --features gamma --t 2 --net " + ws.path("net.json") + " --table " + ws.path("tab.csv") +
               " --labels " + ws.path("lab.csv") + " --threshold 0 --out " + ws.path("model.json")) == 0);
  const auto model = json::parse(ws.read("model.json"));
  CHECK(model["feature_kind"] == "gamma");
  CHECK(model["t"] == 2.0);
  CHECK(model["taxa"].size() == 24);

  CHECK(ws.run("biomarker score --model " + ws.path("model.json") + " --net " + ws.path("net.json") + " --table " +
               ws.path("tab.csv") + " --out " + ws.path("scores.csv")) == 0);
  CHECK(ws.read("scores.csv").rfind("score,predicted\n", 0) == 0);
  CHECK(ws.run("biomarker roc --model " + ws.path("model.json") + " --net " + ws.path("net.json") + " --table " +
               ws.path("tab.csv") + " --labels " + ws.path("lab.csv") + " --out " + ws.path("roc.csv")) == 0);
  CHECK(ws.read("roc.csv").rfind("threshold,fpr,tpr\n", 0) == 0);

  CHECK(ws.run("biomarker select --table " + ws.path("tab.csv") + " --labels " + ws.path("lab.csv") +
               " --alpha 0.1 --t 1 --t 2 --out " + ws.path("sel.json")) == 0);
  CHECK(json::parse(ws.read("sel.json"))["surface"].size() == 1);

  // gamma without a network is an input error
  CHECK(ws.run("biomarker train --features gamma --table " + ws.path("tab.csv") + " --labels " + ws.path("lab.csv") +
               " --out " + ws.path("m2.json")) == 2);
  CHECK_FALSE(fs::exists(ws.dir / "m2.json"));
}

TEST_CASE("numeric failures exit 1 without output") {
  Workspace ws;
  ws.write("tab.csv", "a,b\n1,1\n2,2\n1,1\n2,2\n");
  ws.write("lab.csv", "label\n0\n0\n1\n1\n");
  CHECK(ws.run("biomarker train --features beta --table " + ws.path("tab.csv") + " --labels " + ws.path("lab.csv") +
               " --out " + ws.path("m.json")) == 1);
  CHECK(ws.read("err.txt").find("DegenerateSeparation") != std::string::npos);
  CHECK_FALSE(fs::exists(ws.dir / "m.json"));
}
