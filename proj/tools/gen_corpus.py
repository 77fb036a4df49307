#!/usr/bin/env python3
#
# retrograph - Copyright 2026 The retrograph Authors.
# SPDX-License-Identifier: Apache-2.0
#
"""Builds the bundled sample corpora under data/.

Developer tool only; the C++ build never runs it. Requires RDKit. Reactions
are produced by applying atom-mapped templates to building blocks, so every
product atom carries a map number traced back to its reactant atom.

Outputs:
  data/molecules.smi     500 molecules, one SMILES per line
  data/reactions_1k.txt  1,000 typed, atom-mapped reactions
  data/toy64.txt         64 reactions for overfitting runs
  tests/data/brics_reference.tsv  RDKit BRICS bond counts per corpus molecule
"""

import argparse
import random
from pathlib import Path

from rdkit import Chem, RDLogger
from rdkit.Chem import AllChem, BRICS

RDLogger.DisableLog("rdApp.*")

ACIDS = [
    "CC(=O)O", "OC(=O)c1ccccc1", "OC(=O)c1ccc(Cl)cc1", "OC(=O)c1ccncc1", "OC(=O)CCc1ccccc1",
    "OC(=O)c1cccs1", "OC(=O)C1CCCCC1", "OC(=O)c1ccc(OC)cc1", "OC(=O)Cc1ccc(F)cc1",
    "OC(=O)c1ccc2ccccc2c1", "OC(=O)c1ccc(Br)cc1", "OC(=O)c1csc(-c2ccc(F)cc2)c1", "OC(=O)c1ccco1",
    "OC(=O)C1CC1", "OC(=O)c1cc(C)cc(C)c1", "OC(=O)c1cnccn1",
]
AMINES = [
    "NCc1ccccc1", "NC1CCCCC1", "Nc1ccccc1", "Nc1ccc(F)cc1", "C1CCNCC1", "C1COCCN1", "CNC",
    "NCc1ccco1", "Nc1ccncc1", "CN1CCNCC1", "NC(C)C", "NCCc1ccccc1", "Nc1cccc(Cl)c1", "C1CCNC1",
    "NCC1CC1", "CNCc1ccccc1", "Nc1ccc(OC)cc1", "NCCOC",
]
PHENOLS = ["Oc1ccccc1", "Oc1ccc(Cl)cc1", "Oc1ccc(C#N)cc1", "Oc1cccc(C)c1", "Oc1ccc(F)cc1", "Oc1ccncc1"]
ALCOHOLS = ["OCc1ccccc1", "OCC", "CO", "OCCN(C)C", "OC1CCCC1", "OCCc1ccccc1", "OCC1CCCO1", "OC(C)C"]
ALKYL_HALIDES = [
    "BrCc1ccccc1", "BrCC", "CBr", "BrCCOC", "BrCc1ccc(F)cc1", "BrCC(=O)OCC", "ClCc1ccncc1",
    "BrCC1CC1", "BrCc1cccc(C#N)c1", "BrCCCC",
]
ARYL_BROMIDES = [
    "Brc1ccccc1", "Brc1ccc(C)cc1", "Brc1ccncc1", "Brc1cccs1", "Brc1ccc(C(=O)OC)cc1",
    "Brc1ccc2ccccc2c1", "Brc1ccc(OC)cc1", "Brc1cccc(C#N)c1", "Brc1cnccn1", "Brc1ccc(F)cc1",
    "Brc1ccc(C(F)(F)F)cc1",
]
BORONIC = [
    "OB(O)c1ccccc1", "OB(O)c1ccc(F)cc1", "OB(O)c1ccc(OC)cc1", "OB(O)c1cccnc1", "OB(O)c1ccsc1",
    "OB(O)c1ccc(C)cc1", "OB(O)c1ccc2ccccc2c1",
]
SULFONYL = ["CS(=O)(=O)Cl", "Cc1ccc(S(=O)(=O)Cl)cc1", "O=S(=O)(Cl)c1ccccc1", "O=S(=O)(Cl)c1cccs1"]
ACYL_CHLORIDES = ["CC(=O)Cl", "O=C(Cl)c1ccccc1", "O=C(Cl)c1ccc(F)cc1", "O=C(Cl)C1CCCCC1", "O=C(Cl)c1ccco1"]
ALDEHYDES = ["O=Cc1ccccc1", "O=Cc1ccncc1", "O=CC1CC1", "O=Cc1ccc(Cl)cc1", "O=Cc1cccs1"]
KETONES = ["CC(=O)c1ccccc1", "O=C1CCCCC1", "CC(=O)c1ccc(Br)cc1", "O=C1CCN(Cc2ccccc2)CC1", "CCC(=O)CC"]
SEC_ALCOHOLS = ["CC(O)c1ccccc1", "OC1CCCCC1", "OCc1ccccc1", "CC(O)CC", "OC1CCN(C(=O)OC(C)(C)C)CC1"]
NITRO = [
    "O=[N+]([O-])c1ccccc1", "Cc1ccc([N+](=O)[O-])cc1", "O=[N+]([O-])c1ccc(F)cc1",
    "O=[N+]([O-])c1cccnc1", "COC(=O)c1ccc([N+](=O)[O-])cc1",
]
ALKENES = ["C=Cc1ccccc1", "CCOC(=O)C=Cc1ccccc1", "C1=CCCCC1", "C=CC(=O)OC"]
NITRILES = ["N#Cc1ccccc1", "N#CCc1ccccc1", "N#Cc1ccc(F)cc1"]
ALKYNES = ["C#Cc1ccccc1", "C#CCO", "C#C[Si](C)(C)C", "C#CC1CC1"]
ARENES = ["c1ccc2ccccc2c1", "Cc1ccccc1", "COc1ccccc1", "c1ccsc1", "Oc1ccccc1"]

BOC2O = "CC(C)(C)OC(=O)OC(=O)OC(C)(C)C"
B2PIN2 = "CC1(C)OB(B2OC(C)(C)C(C)(C)O2)OC1(C)C"

AMINE_N = "[N;H1,H2;!$(N-C=O);!$(N-S(=O)=O);!$(N-c);!$(N-[CH2]-c1ccccc1-*)]"
ANY_AMINE_N = "[N;H1,H2;!$(N-C=O);!$(N-S(=O)=O)]"

# (name, reaction type, SMARTS, reactant pools)
TEMPLATES = [
    ("amide", 2, f"[C:1](=[O:2])[OH1].{ANY_AMINE_N.replace(']', ':3]')}>>[C:1](=[O:2])[N:3]", [ACIDS, AMINES]),
    ("acyl_chloride", 2, f"[C:1](=[O:2])Cl.{ANY_AMINE_N.replace(']', ':3]')}>>[C:1](=[O:2])[N:3]",
     [ACYL_CHLORIDES, AMINES]),
    ("ester", 2, "[C:1](=[O:2])[OH1].[OH1;$(O[CX4]):3]>>[C:1](=[O:2])[O:3]", [ACIDS, ALCOHOLS]),
    ("sulfonamide", 2, f"[S:1](=[O:2])(=[O:3])Cl.{ANY_AMINE_N.replace(']', ':4]')}>>[S:1](=[O:2])(=[O:3])[N:4]",
     [SULFONYL, AMINES]),
    ("n_alkylation", 1, f"{AMINE_N.replace(']', ':1]')}.[CH2,CH3;!$(C=O):2][Br,Cl]>>[N:1][C:2]",
     [AMINES, ALKYL_HALIDES]),
    ("williamson", 1, "[OH1;$(Oc):1].[CH2,CH3;!$(C=O):2]Br>>[O:1][C:2]", [PHENOLS, ALKYL_HALIDES]),
    ("buchwald", 1, f"[c:1]Br.{AMINE_N.replace(']', ':2]')}>>[c:1][N:2]", [ARYL_BROMIDES, AMINES]),
    ("reductive_amination", 1, f"[CH1:1]=O.{ANY_AMINE_N.replace(']', ':2]')}>>[CH2:1][N:2]",
     [ALDEHYDES, AMINES]),
    ("suzuki", 3, "[c:1]Br.[c:2]B(O)O>>[c:1][c:2]", [ARYL_BROMIDES, BORONIC]),
    ("sonogashira", 3, "[c:1]Br.[CH1:2]#[C:3]>>[c:1][C:2]#[C:3]", [ARYL_BROMIDES, ALKYNES]),
    ("boc_protection", 5,
     "[CH3:5][C:6]([CH3:7])([CH3:8])[O:9][C:10](=[O:11])OC(=O)OC(C)(C)C."
     f"{ANY_AMINE_N.replace(']', ':1]')}>>[CH3:5][C:6]([CH3:7])([CH3:8])[O:9][C:10](=[O:11])[N:1]",
     [[BOC2O], AMINES]),
    ("mesylation", 9, "[OH1;$(O[CX4]):1].[S:2](=[O:3])(=[O:4])([CH3:5])Cl>>[O:1][S:2](=[O:3])(=[O:4])[CH3:5]",
     [ALCOHOLS, ["CS(=O)(=O)Cl"]]),
    ("borylation", 9,
     "[c:1]Br.[B:2]1([O:3][C:4]([CH3:5])([CH3:6])[C:7]([CH3:8])([CH3:9])[O:10]1)B1OC(C)(C)C(C)(C)O1>>"
     "[c:1][B:2]1[O:3][C:4]([CH3:5])([CH3:6])[C:7]([CH3:8])([CH3:9])[O:10]1",
     [ARYL_BROMIDES, [B2PIN2]]),
    ("bromination", 10, "[cH1:1].[Br:2]Br>>[c:1][Br:2]", [ARENES, ["BrBr"]]),
    ("oxidation", 8, "[CH1,CH2;!$(C=*);!$(C-[#7,#8,#16]-*):1][OH1:2]>>[C:1]=[O:2]", [SEC_ALCOHOLS]),
    ("ketone_reduction", 7, "[#6:3][C;!$(C-[#7,#8,Cl]):1](=[O:2])>>[#6:3][C:1][OH1:2]", [KETONES + ALDEHYDES]),
    ("alkene_reduction", 7, "[C:1]=[C:2]>>[C:1][C:2]", [ALKENES]),
    ("nitro_reduction", 7, "[c:1][N+:2](=O)[O-]>>[c:1][NH2+0:2]", [NITRO]),
    ("nitrile_reduction", 7, "[C:1]#[N:2]>>[CH2:1][NH2:2]", [NITRILES]),
]

# Templates applied to products of other templates (deprotections).
DEPROTECTIONS = [
    ("boc_deprotection", 6, "CC(C)(C)OC(=O)[N:1]>>[N:1]", "boc_protection"),
    ("ester_hydrolysis", 6, "[C:1](=[O:2])[O:3][CH3]>>[C:1](=[O:2])[OH1:3]", "ester"),
    ("benzyl_deprotection", 6, "[O:1]([c:2])[CH2]c1ccccc1>>[O:1][c:2]", "williamson"),
]


def run_template(smarts, reactant_smiles):
    rxn = AllChem.ReactionFromSmarts(smarts)
    mols = [Chem.MolFromSmiles(s) for s in reactant_smiles]
    if any(m is None for m in mols):
        return None
    outcomes = rxn.RunReactants(tuple(mols))
    for outcome in outcomes:
        product = outcome[0]
        try:
            Chem.SanitizeMol(product)
        except Exception:
            continue
        record = map_reaction(mols, product)
        if record is not None:
            return record
    return None


def map_reaction(reactants, product):
    reactants = [Chem.Mol(m) for m in reactants]
    product = Chem.Mol(product)
    for m in reactants:
        for a in m.GetAtoms():
            a.SetAtomMapNum(0)
    for i, atom in enumerate(product.GetAtoms()):
        props = atom.GetPropsAsDict()
        if "react_idx" not in props or "react_atom_idx" not in props:
            return None
        atom.SetAtomMapNum(i + 1)
        reactants[props["react_idx"]].GetAtomWithIdx(props["react_atom_idx"]).SetAtomMapNum(i + 1)
    Chem.RemoveStereochemistry(product)
    used = [m for m in reactants if any(a.GetAtomMapNum() for a in m.GetAtoms())]
    reactant_smiles = ".".join(Chem.MolToSmiles(m) for m in used)
    product_smiles = Chem.MolToSmiles(product)
    return reactant_smiles, product_smiles


def strip_maps(smiles):
    mol = Chem.MolFromSmiles(smiles)
    for a in mol.GetAtoms():
        a.SetAtomMapNum(0)
    return Chem.MolToSmiles(mol)


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    rng = random.Random(args.seed)

    by_template = {}
    for name, rtype, smarts, pools in TEMPLATES:
        records = set()
        combos = [[]]
        for pool in pools:
            combos = [c + [s] for c in combos for s in pool]
        for combo in combos:
            rec = run_template(smarts, combo)
            if rec is not None:
                records.add((rtype, rec[0], rec[1]))
        by_template[name] = sorted(records)

    for name, rtype, smarts, source in DEPROTECTIONS:
        records = set()
        for _, _, product in by_template[source]:
            protected = strip_maps(product)
            rec = run_template(smarts, [protected])
            if rec is not None:
                records.add((rtype, rec[0], rec[1]))
        by_template[name] = sorted(records)

    for name in by_template:
        rng.shuffle(by_template[name])

    # Round-robin over templates so every center kind is represented.
    names = sorted(by_template)
    pool = []
    cursor = {n: 0 for n in names}
    while len(pool) < 1000 and any(cursor[n] < len(by_template[n]) for n in names):
        for n in names:
            if cursor[n] < len(by_template[n]) and len(pool) < 1000:
                pool.append(by_template[n][cursor[n]])
                cursor[n] += 1
    rng.shuffle(pool)

    toy = []
    seen_templates = {n: 0 for n in names}
    for n in names:
        for rec in by_template[n][:3]:
            toy.append(rec)
            seen_templates[n] += 1
    rng.shuffle(toy)
    toy = toy[:64]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "reactions_1k.txt", "w") as f:
        for rtype, r, p in pool:
            f.write(f"{rtype},{r}>>{p}\n")
    with open(out / "toy64.txt", "w") as f:
        for rtype, r, p in toy:
            f.write(f"{rtype},{r}>>{p}\n")

    molecules = set()
    building_blocks = (ACIDS + AMINES + PHENOLS + ALCOHOLS + ALKYL_HALIDES + ARYL_BROMIDES + BORONIC + SULFONYL
                       + ACYL_CHLORIDES + ALDEHYDES + KETONES + SEC_ALCOHOLS + NITRO + ALKENES + NITRILES + ALKYNES
                       + ARENES + [BOC2O, B2PIN2])
    for s in building_blocks:
        molecules.add(Chem.MolToSmiles(Chem.MolFromSmiles(s)))
    products = sorted({strip_maps(p) for _, _, p in pool})
    rng.shuffle(products)
    for p in products:
        if len(molecules) >= 500:
            break
        molecules.add(p)
    with open(out / "molecules.smi", "w") as f:
        for s in sorted(molecules):
            f.write(s + "\n")
    ref_dir = out.parent / "tests" / "data"
    ref_dir.mkdir(parents=True, exist_ok=True)
    with open(ref_dir / "brics_reference.tsv", "w") as f:
        for s in sorted(molecules):
            bonds = {tuple(sorted(b[0])) for b in BRICS.FindBRICSBonds(Chem.MolFromSmiles(s))}
            f.write(f"{s}\t{len(bonds)}\n")
    print(f"reactions: {len(pool)}  toy: {len(toy)}  molecules: {len(molecules)}")
    for n in names:
        print(f"  {n}: {len(by_template[n])}")


if __name__ == "__main__":
    main()
