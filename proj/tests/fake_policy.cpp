// Stand-in external policy for protocol tests. The first argument selects
// its behaviour:
//   good      fix every service whose targetPort misses its deployment's port
//   lint      answer with an interactive exec
//   silent    read requests and never answer
//   garbage   answer with a frame that is not JSON
//   badframe  answer with a broken frame header
//   exit      quit before answering

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <thread>

namespace {

bool read_frame(std::string& out) {
  std::string header;
  int c;
  while ((c = std::getchar()) != EOF && c != '\n') header.push_back(static_cast<char>(c));
  if (c == EOF) return false;
  std::size_t len = std::stoul(header);
  out.resize(len);
  return std::fread(out.data(), 1, len, stdin) == len;
}

void write_frame(const std::string& payload) {
  std::cout << payload.size() << '\n' << payload << std::flush;
}

nlohmann::json fix_ports(const nlohmann::json& obs) {
  nlohmann::json cmds = nlohmann::json::array();
  const auto& inv = obs["inventory"];
  for (const auto& s : inv["services"])
    for (const auto& d : inv["deployments"])
      if (d["name"] == s["name"] && d["container_port"] != s["target_port"]) {
        nlohmann::json body = {{"spec", {{"ports", {{{"targetPort", d["container_port"]}}}}}}};
        cmds.push_back("kubectl patch service " + s["name"].get<std::string>() + " -n " +
                       obs["namespace"].get<std::string>() + " --type merge -p '" + body.dump() + "'");
      }
  return {{"intent", "align service target ports"}, {"commands", cmds}, {"expected_effect", "traffic flows"}};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "good";
  std::string req;
  while (read_frame(req)) {
    auto obs = nlohmann::json::parse(req);
    if (mode == "good") {
      write_frame(fix_ports(obs).dump());
    } else if (mode == "lint") {
      write_frame(R"({"intent":"poke","commands":["kubectl exec -it frontend -- sh"]})");
    } else if (mode == "silent") {
      std::this_thread::sleep_for(std::chrono::seconds(30));
    } else if (mode == "garbage") {
      write_frame("this is not json");
    } else if (mode == "badframe") {
      std::cout << "12x\n{}" << std::flush;
    } else {
      return 0;
    }
  }
  return 0;
}
