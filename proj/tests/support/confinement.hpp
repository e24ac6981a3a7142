#pragma once

#include <string>
#include <vector>

namespace tnr::fixtures {

struct ConfinementCase {
  std::string command;
  bool reader;  // evaluate with the read-only role
  std::string expected;  // "allowed" or the exact rejection
};

// Each shell construct and interactive form, plus commands that must pass.
inline const std::vector<ConfinementCase>& confinement_corpus() {
  static const std::vector<ConfinementCase> cases = {
      {"kubectl apply -f -", false, "Stdin redirection is not allowed."},
      {"kubectl apply -f - < fix.yaml", false, "Stdin redirection is not allowed."},
      {"kubectl create -f - <<< \"$manifest\"", false, "Stdin redirection is not allowed."},
      {"kubectl exec -it frontend-abc -- sh", false, "Interactive flag detected: -it. Such commands are not supported."},
      {"kubectl exec -ti frontend-abc -- sh", false, "Interactive flag detected: -ti. Such commands are not supported."},
      {"kubectl attach frontend-abc -i", false, "Interactive flag detected: -i. Such commands are not supported."},
      {"kubectl exec --stdin --tty frontend-abc -- sh", false,
       "Interactive flag detected: --stdin. Such commands are not supported."},
      {"kubectl edit deployment frontend", false, "Interactive command detected: edit. Such commands are not supported."},
      {"kubectl debug node/kind-worker", false, "Interactive command detected: debug. Such commands are not supported."},
      {"kubectl delete namespace test-hotel-reservation", false, "Namespace deletion is not allowed."},
      {"kubectl delete ns test-hotel-reservation", false, "Namespace deletion is not allowed."},
      {"kubectl get pods | grep Error", false, "Pipe operator detected: |. Only a single command is allowed."},
      {"kubectl get pods; kubectl delete pod x", false, "Compound command detected: ;. Only a single command is allowed."},
      {"kubectl get pods && echo ok", false, "Compound command detected: &&. Only a single command is allowed."},
      {"kubectl get pods || echo failed", false, "Compound command detected: ||. Only a single command is allowed."},
      {"kubectl get pods $(echo x)", false, "Command substitution detected: $(...). Such commands are not supported."},
      {"kubectl get pods `echo x`", false, "Command substitution detected: `. Such commands are not supported."},
      {"for p in a b; do kubectl delete pod $p; done", false, "Flow control detected: for. Such commands are not supported."},
      {"if true; then kubectl get pods; fi", false, "Flow control detected: if. Such commands are not supported."},
      {"while true; do kubectl get pods; done", false, "Flow control detected: while. Such commands are not supported."},
      {"f() { kubectl get pods; }", false,
       "Shell function definition detected: f(). Such commands are not supported."},
      {"kubectl exec frontend-abc -- ls", false, "Command exec has no undo operator and is not allowed."},
      {"kubectl scale deployment frontend --replicas=2", true, "Write command scale is not allowed for read-only agents."},
      {"kubectl delete pod frontend-abc", true, "Write command delete is not allowed for read-only agents."},
      {"helm install foo", false, "Malformed command: unsupported program: helm."},
      {"kubectl get pods -n test-hotel-reservation", true, "allowed"},
      {"kubectl describe pod frontend-abc -n test-hotel-reservation", true, "allowed"},
      {"kubectl logs frontend-abc -n test-hotel-reservation", true, "allowed"},
      {"kubectl get pods -o yaml", true, "allowed"},
      {"kubectl scale deployment frontend --replicas=2 -n test-hotel-reservation", false, "allowed"},
      {"kubectl apply -f - <<EOF\napiVersion: v1\nkind: Service\nmetadata:\n  name: geo\nspec:\n  ports:\n  - port: 8083\n"
       "    targetPort: 8083\n  selector:\n    app: geo\nEOF",
       false, "allowed"},
  };
  return cases;
}

}  // namespace tnr::fixtures
