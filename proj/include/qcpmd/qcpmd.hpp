#pragma once

#include "qcpmd/error.hpp"
#include "qcpmd/units.hpp"
#include "qcpmd/random.hpp"
#include "qcpmd/pauli.hpp"
#include "qcpmd/statevector.hpp"
#include "qcpmd/exact.hpp"
#include "qcpmd/shadow.hpp"
#include "qcpmd/hamiltonian_table.hpp"
#include "qcpmd/dynamics.hpp"
#include "qcpmd/run_config.hpp"
#include "qcpmd/output.hpp"
#include "qcpmd/presets.hpp"
