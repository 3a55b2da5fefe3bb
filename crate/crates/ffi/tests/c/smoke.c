#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "tfch.h"

#define CHECK(call)                                                     \
  do {                                                                  \
    TfchStatus s_ = (call);                                             \
    if (s_ != TFCH_STATUS_OK) {                                         \
      char msg[256];                                                    \
      tfch_last_error_message(msg, sizeof msg);                         \
      fprintf(stderr, "%s failed (%d): %s\n", #call, (int)s_, msg);     \
      return 1;                                                         \
    }                                                                   \
  } while (0)

int main(void) {
  double rs;
  CHECK(tfch_rho_star(1.0, &rs));
  if (fabs(rs - 4.864) > 1e-2) return 2;

  TfchMesh *mesh = NULL;
  CHECK(tfch_mesh_graded_cubic(40, 1.0, &mesh));
  size_t n = tfch_mesh_len(mesh);
  double *nodes = malloc((n + 1) * sizeof *nodes);
  CHECK(tfch_mesh_nodes(mesh, nodes, n + 1));
  if (nodes[n] != 1.0) return 3;

  TfchParams p = tfch_params_default(0.5, 32);
  TfchRun *run = NULL;
  CHECK(tfch_solve(&p, mesh, &run));
  size_t levels = tfch_run_levels(run);
  double *e = malloc(levels * sizeof *e);
  double *mod = malloc(levels * sizeof *mod);
  CHECK(tfch_run_energy(run, e, mod, levels));
  for (size_t k = 2; k < levels; k++) {
    if (mod[k] > mod[k - 1] + 1e-12) return 4;
  }

  if (tfch_rho_star(2.0, &rs) != TFCH_STATUS_INVALID_ARGUMENT) return 5;
  char msg[8];
  size_t need = tfch_last_error_message(msg, sizeof msg);
  if (need <= sizeof msg || msg[7] != '\0') return 6;

  printf("ok %zu levels, E^N = %.6e\n", levels, e[levels - 1]);
  free(nodes);
  free(e);
  free(mod);
  tfch_run_free(run);
  tfch_mesh_free(mesh);
  return 0;
}
