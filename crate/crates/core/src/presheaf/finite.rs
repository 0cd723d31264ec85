//! Finite presheaves, natural transformations, pushouts and isomorphism.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::base::{equations_into, generators_into, hom_into, BaseMorphism, BaseObject, Generator};
use super::PresheafError;

/// A presheaf with finite carriers and finite support. Carriers are
/// `0..size`; the action of a generator `g: c -> d` maps the carrier of `d`
/// to that of `c`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinPresheaf {
    carriers: BTreeMap<BaseObject, usize>,
    actions: BTreeMap<Generator, Vec<usize>>,
}

impl FinPresheaf {
    pub fn new() -> FinPresheaf {
        FinPresheaf::default()
    }

    /// Sets the carrier size of `object`; size zero removes it from the support.
    pub fn set_carrier(&mut self, object: BaseObject, size: usize) {
        if size == 0 {
            self.carriers.remove(&object);
        } else {
            self.carriers.insert(object, size);
        }
    }

    /// Adds one element to the carrier of `object` and returns it.
    pub fn add_element(&mut self, object: BaseObject) -> usize {
        let slot = self.carriers.entry(object).or_insert(0);
        *slot += 1;
        *slot - 1
    }

    pub fn set_action(&mut self, generator: Generator, images: Vec<usize>) {
        self.actions.insert(generator, images);
    }

    /// Records the image of one element under a generator, growing the
    /// action table as needed.
    pub fn set_image(&mut self, generator: Generator, element: usize, image: usize) {
        let row = self.actions.entry(generator).or_default();
        if row.len() <= element {
            row.resize(element + 1, usize::MAX);
        }
        row[element] = image;
    }

    pub fn size(&self, object: BaseObject) -> usize {
        self.carriers.get(&object).copied().unwrap_or(0)
    }

    pub fn carriers(&self) -> &BTreeMap<BaseObject, usize> {
        &self.carriers
    }

    pub fn actions(&self) -> &BTreeMap<Generator, Vec<usize>> {
        &self.actions
    }

    pub fn support(&self) -> impl Iterator<Item = BaseObject> + '_ {
        self.carriers.keys().copied()
    }

    pub fn total_elements(&self) -> usize {
        self.carriers.values().sum()
    }

    pub fn act(&self, generator: Generator, element: usize) -> Option<usize> {
        self.actions.get(&generator).and_then(|row| row.get(element)).copied()
    }

    /// Acts by a path given in traversal order (source first), i.e. applies
    /// the generators from last to first.
    pub fn act_path(&self, path: &[Generator], element: usize) -> Option<usize> {
        path.iter().rev().try_fold(element, |x, g| self.act(*g, x))
    }

    pub fn act_morphism(&self, morphism: &BaseMorphism, element: usize) -> Option<usize> {
        self.act_path(&morphism.path, element)
    }

    /// Checks shapes of actions and all equation instances, reporting the
    /// first problem.
    pub fn validate(&self) -> Result<(), PresheafError> {
        for (&object, &size) in &self.carriers {
            for g in generators_into(object) {
                let row = self
                    .actions
                    .get(&g)
                    .ok_or_else(|| PresheafError::MissingAction(g.key()))?;
                if row.len() != size {
                    return Err(PresheafError::ActionSize {
                        generator: g.key(),
                        expected: size,
                        found: row.len(),
                    });
                }
                let bound = self.size(g.source());
                if row.iter().any(|&x| x >= bound) {
                    return Err(PresheafError::ActionRange {
                        generator: g.key(),
                        object: g.source().key(),
                    });
                }
            }
            for eq in equations_into(object) {
                for x in 0..size {
                    if self.act_path(&eq.left, x) != self.act_path(&eq.right, x) {
                        let keys: Vec<String> = eq.left.iter().map(|g| g.key()).collect();
                        return Err(PresheafError::EquationFails(keys.join(";")));
                    }
                }
            }
        }
        for (g, row) in &self.actions {
            if !row.is_empty() && self.size(g.target()) == 0 {
                return Err(PresheafError::ActionSize { generator: g.key(), expected: 0, found: row.len() });
            }
        }
        Ok(())
    }

    /// Coproduct with `other`: elements of `other` are shifted past those of `self`.
    pub fn disjoint_union(&self, other: &FinPresheaf) -> FinPresheaf {
        let mut out = self.clone();
        for (&o, &n) in &other.carriers {
            out.set_carrier(o, self.size(o) + n);
        }
        for (&g, row) in &other.actions {
            let shift = self.size(g.source());
            let dst = out.actions.entry(g).or_default();
            dst.extend(row.iter().map(|x| x + shift));
        }
        out
    }

    /// The JSON form `{object-key: {size, actions: {generator-key: [images]}}}`.
    pub fn to_json(&self) -> Value {
        let mut top = Map::new();
        for (&object, &size) in &self.carriers {
            let mut actions = Map::new();
            for g in generators_into(object) {
                if let Some(row) = self.actions.get(&g) {
                    actions.insert(g.key(), json!(row));
                }
            }
            top.insert(object.key(), json!({ "size": size, "actions": actions }));
        }
        Value::Object(top)
    }

    pub fn from_json(value: &Value) -> Result<FinPresheaf, PresheafError> {
        let bad = |m: &str| PresheafError::Json(m.to_string());
        let top = value.as_object().ok_or_else(|| bad("expected an object"))?;
        let mut out = FinPresheaf::new();
        for (key, entry) in top {
            let object: BaseObject = key.parse()?;
            let size = entry
                .get("size")
                .and_then(Value::as_u64)
                .ok_or_else(|| bad("missing size"))? as usize;
            out.set_carrier(object, size);
            if let Some(actions) = entry.get("actions").and_then(Value::as_object) {
                for (gkey, images) in actions {
                    let g: Generator = gkey.parse()?;
                    if g.target() != object {
                        return Err(bad("generator listed under the wrong object"));
                    }
                    let row: Vec<usize> = serde_json::from_value(images.clone())
                        .map_err(|e| PresheafError::Json(e.to_string()))?;
                    out.set_action(g, row);
                }
            }
        }
        out.validate()?;
        Ok(out)
    }
}

/// Whether every equation instance commutes on the carriers of `f`.
pub fn check_presheaf(f: &FinPresheaf) -> bool {
    f.validate().is_ok()
}

/// An element of a representable: an object and a morphism from it into the
/// representing object.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub object: BaseObject,
    pub index: usize,
    pub morphism: BaseMorphism,
}

/// A generating arrow of the category of elements, `source -> target`,
/// indices into [`ElementCategory::elements`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementArrow {
    pub source: usize,
    pub target: usize,
    pub generator: Generator,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementCategory {
    pub object: BaseObject,
    pub presheaf: FinPresheaf,
    pub elements: Vec<Element>,
    pub arrows: Vec<ElementArrow>,
}

impl ElementCategory {
    pub fn element(&self, object: BaseObject, index: usize) -> Option<usize> {
        self.elements.iter().position(|e| e.object == object && e.index == index)
    }
}

/// The representable presheaf on `c` together with its category of elements.
pub fn elements_of_representable(c: BaseObject) -> ElementCategory {
    let homs = hom_into(c);
    let mut presheaf = FinPresheaf::new();
    let mut elements = Vec::new();
    for (&object, ms) in &homs {
        presheaf.set_carrier(object, ms.len());
        for (index, m) in ms.iter().enumerate() {
            elements.push(Element { object, index, morphism: m.clone() });
        }
    }
    let mut arrows = Vec::new();
    for (ti, e) in elements.iter().enumerate() {
        for g in generators_into(e.object) {
            let composite = BaseMorphism::generator(g)
                .then(&e.morphism)
                .expect("generator composes with an element");
            let source_homs = &homs[&g.source()];
            let image = source_homs
                .iter()
                .position(|m| *m == composite)
                .expect("hom table is closed under precomposition");
            presheaf.set_image(g, e.index, image);
            let si = elements
                .iter()
                .position(|x| x.object == g.source() && x.index == image)
                .expect("element present");
            arrows.push(ElementArrow { source: si, target: ti, generator: g });
        }
    }
    ElementCategory { object: c, presheaf, elements, arrows }
}

/// A natural transformation between finite presheaves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresheafMorphism {
    pub source: FinPresheaf,
    pub target: FinPresheaf,
    pub components: BTreeMap<BaseObject, Vec<usize>>,
}

impl PresheafMorphism {
    /// Builds a morphism, checking component shapes and naturality.
    pub fn new(
        source: FinPresheaf,
        target: FinPresheaf,
        components: BTreeMap<BaseObject, Vec<usize>>,
    ) -> Result<PresheafMorphism, PresheafError> {
        let m = PresheafMorphism { source, target, components };
        m.check_shape()?;
        if let Some(g) = m.first_non_natural() {
            return Err(PresheafError::NotNatural(g.key()));
        }
        Ok(m)
    }

    pub fn identity(f: &FinPresheaf) -> PresheafMorphism {
        let components = f.carriers.iter().map(|(&o, &n)| (o, (0..n).collect())).collect();
        PresheafMorphism { source: f.clone(), target: f.clone(), components }
    }

    /// The unique morphism out of the empty presheaf.
    pub fn from_empty(target: &FinPresheaf) -> PresheafMorphism {
        PresheafMorphism { source: FinPresheaf::new(), target: target.clone(), components: BTreeMap::new() }
    }

    pub fn apply(&self, object: BaseObject, element: usize) -> usize {
        self.components[&object][element]
    }

    fn check_shape(&self) -> Result<(), PresheafError> {
        for (&o, &n) in &self.source.carriers {
            let bound = self.target.size(o);
            match self.components.get(&o) {
                Some(row) if row.len() == n && row.iter().all(|&y| y < bound) => {}
                _ => return Err(PresheafError::ComponentShape { object: o.key() }),
            }
        }
        Ok(())
    }

    fn first_non_natural(&self) -> Option<Generator> {
        for (&o, &n) in &self.source.carriers {
            for g in generators_into(o) {
                for x in 0..n {
                    let lhs = self.source.act(g, x).map(|y| self.apply(g.source(), y));
                    let rhs = self.target.act(g, self.apply(o, x));
                    if lhs != rhs {
                        return Some(g);
                    }
                }
            }
        }
        None
    }

    pub fn is_natural(&self) -> bool {
        self.check_shape().is_ok() && self.first_non_natural().is_none()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &PresheafMorphism) -> PresheafMorphism {
        let components = self
            .components
            .iter()
            .map(|(&o, row)| (o, row.iter().map(|&x| next.apply(o, x)).collect()))
            .collect();
        PresheafMorphism { source: self.source.clone(), target: next.target.clone(), components }
    }
}

/// Whether every component is injective.
pub fn is_mono(phi: &PresheafMorphism) -> bool {
    phi.components.iter().all(|(&o, row)| {
        let mut seen = vec![false; phi.target.size(o)];
        row.iter().all(|&y| !std::mem::replace(&mut seen[y], true))
    })
}

/// A pushout square `X -> Z <- Y` under `I`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pushout {
    pub apex: FinPresheaf,
    pub left: PresheafMorphism,
    pub right: PresheafMorphism,
}

impl Pushout {
    /// The mediating map `Z -> W` induced by `h: X -> W` and `k: Y -> W`
    /// agreeing on `I`.
    pub fn mediate(&self, h: &PresheafMorphism, k: &PresheafMorphism) -> Result<PresheafMorphism, PresheafError> {
        if h.target != k.target {
            return Err(PresheafError::NotCocone);
        }
        let mut components: BTreeMap<BaseObject, Vec<Option<usize>>> = self
            .apex
            .carriers
            .iter()
            .map(|(&o, &n)| (o, vec![None; n]))
            .collect();
        for (leg, map) in [(&self.left, h), (&self.right, k)] {
            for (&o, row) in &leg.components {
                for (x, &z) in row.iter().enumerate() {
                    let w = map.apply(o, x);
                    let slot = &mut components.get_mut(&o).expect("apex object")[z];
                    match slot {
                        Some(prev) if *prev != w => return Err(PresheafError::NotCocone),
                        _ => *slot = Some(w),
                    }
                }
            }
        }
        let components = components
            .into_iter()
            .map(|(o, row)| (o, row.into_iter().map(|x| x.expect("jointly surjective legs")).collect()))
            .collect();
        PresheafMorphism::new(self.apex.clone(), h.target.clone(), components)
    }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut root = x;
    while parent[root] != root {
        root = parent[root];
    }
    let mut y = x;
    while parent[y] != root {
        let next = parent[y];
        parent[y] = root;
        y = next;
    }
    root
}

/// The pointwise pushout of `f: I -> X` and `g: I -> Y`. Apex elements are
/// numbered by first occurrence, elements of `X` before those of `Y`.
pub fn pushout(f: &PresheafMorphism, g: &PresheafMorphism) -> Result<Pushout, PresheafError> {
    if f.source != g.source {
        return Err(PresheafError::DomainMismatch);
    }
    let (x, y) = (&f.target, &g.target);
    let mut objects: Vec<BaseObject> = x.support().chain(y.support()).collect();
    objects.sort();
    objects.dedup();
    let mut apex = FinPresheaf::new();
    let mut left = BTreeMap::new();
    let mut right = BTreeMap::new();
    for &o in &objects {
        let (nx, ny) = (x.size(o), y.size(o));
        let mut parent: Vec<usize> = (0..nx + ny).collect();
        for i in 0..f.source.size(o) {
            let a = find(&mut parent, f.apply(o, i));
            let b = find(&mut parent, nx + g.apply(o, i));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut class_of: BTreeMap<usize, usize> = BTreeMap::new();
        let mut index = Vec::with_capacity(nx + ny);
        for e in 0..nx + ny {
            let root = find(&mut parent, e);
            let next = class_of.len();
            index.push(*class_of.entry(root).or_insert(next));
        }
        apex.set_carrier(o, class_of.len());
        left.insert(o, index[..nx].to_vec());
        right.insert(o, index[nx..].to_vec());
    }
    for (leg_src, leg) in [(x, &left), (y, &right)] {
        for (&gen, row) in &leg_src.actions {
            let (Some(tgt_map), Some(src_map)) = (leg.get(&gen.target()), leg.get(&gen.source())) else {
                continue;
            };
            for (e, &img) in row.iter().enumerate() {
                apex.set_image(gen, tgt_map[e], src_map[img]);
            }
        }
    }
    let left = PresheafMorphism { source: x.clone(), target: apex.clone(), components: left };
    let right = PresheafMorphism { source: y.clone(), target: apex.clone(), components: right };
    Ok(Pushout { apex, left, right })
}

struct IsoSearch<'a> {
    a: &'a FinPresheaf,
    b: &'a FinPresheaf,
    fwd: BTreeMap<BaseObject, Vec<Option<usize>>>,
    bwd: BTreeMap<BaseObject, Vec<Option<usize>>>,
    trail: Vec<(BaseObject, usize, usize)>,
}

impl IsoSearch<'_> {
    fn assign(&mut self, o: BaseObject, x: usize, y: usize) -> bool {
        if let Some(prev) = self.fwd[&o][x] {
            return prev == y;
        }
        if self.bwd[&o][y].is_some() {
            return false;
        }
        self.fwd.get_mut(&o).unwrap()[x] = Some(y);
        self.bwd.get_mut(&o).unwrap()[y] = Some(x);
        self.trail.push((o, x, y));
        for g in generators_into(o) {
            match (self.a.act(g, x), self.b.act(g, y)) {
                (Some(x2), Some(y2)) => {
                    if !self.assign(g.source(), x2, y2) {
                        return false;
                    }
                }
                (None, None) => {}
                _ => return false,
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (o, x, y) = self.trail.pop().unwrap();
            self.fwd.get_mut(&o).unwrap()[x] = None;
            self.bwd.get_mut(&o).unwrap()[y] = None;
        }
    }

    fn search(&mut self, order: &[(BaseObject, usize)]) -> bool {
        let Some((&(o, x), rest)) = order.split_first() else {
            return true;
        };
        if self.fwd[&o][x].is_some() {
            return self.search(rest);
        }
        for y in 0..self.b.size(o) {
            if self.bwd[&o][y].is_some() {
                continue;
            }
            let mark = self.trail.len();
            if self.assign(o, x, y) && self.search(rest) {
                return true;
            }
            self.undo(mark);
        }
        false
    }
}

/// Whether `a` and `b` are isomorphic, by backtracking over bijections
/// assigned from the highest objects down.
pub fn is_isomorphic(a: &FinPresheaf, b: &FinPresheaf) -> bool {
    if a.carriers != b.carriers {
        return false;
    }
    let mut order: Vec<(BaseObject, usize)> = a
        .carriers
        .iter()
        .flat_map(|(&o, &n)| (0..n).map(move |x| (o, x)))
        .collect();
    order.sort_by_key(|&(o, x)| (std::cmp::Reverse(o.level()), o, x));
    let empty = |p: &FinPresheaf| p.carriers.iter().map(|(&o, &n)| (o, vec![None; n])).collect();
    let mut st = IsoSearch { a, b, fwd: empty(a), bwd: empty(b), trail: Vec::new() };
    st.search(&order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::MoveKind;

    fn channels(n: usize) -> FinPresheaf {
        let mut p = FinPresheaf::new();
        p.set_carrier(BaseObject::Star, n);
        p
    }

    fn individual(n: usize) -> FinPresheaf {
        elements_of_representable(BaseObject::Player(n)).presheaf
    }

    fn interface_inclusion(n: usize) -> PresheafMorphism {
        let target = individual(n);
        let components = BTreeMap::from([(BaseObject::Star, (0..n).collect())]);
        PresheafMorphism::new(channels(n), target, components).unwrap()
    }

    #[test]
    fn representable_of_player() {
        let e = elements_of_representable(BaseObject::Player(3));
        assert_eq!(e.presheaf.size(BaseObject::Star), 3);
        assert_eq!(e.presheaf.size(BaseObject::Player(3)), 1);
        assert_eq!(e.presheaf.carriers().len(), 2);
        assert!(check_presheaf(&e.presheaf));
        assert_eq!(e.arrows.len(), 3);
    }

    #[test]
    fn representable_of_fork() {
        let e = elements_of_representable(BaseObject::Move(MoveKind::Para { arity: 2 }));
        let p = &e.presheaf;
        assert_eq!(p.size(BaseObject::Star), 2);
        assert_eq!(p.size(BaseObject::Player(2)), 3);
        assert_eq!(p.size(BaseObject::Move(MoveKind::ParaL { arity: 2 })), 1);
        assert_eq!(p.size(BaseObject::Move(MoveKind::ParaR { arity: 2 })), 1);
        assert_eq!(p.size(BaseObject::Move(MoveKind::Para { arity: 2 })), 1);
        assert!(check_presheaf(p));
    }

    #[test]
    fn representable_of_star() {
        let e = elements_of_representable(BaseObject::Star);
        assert_eq!(e.presheaf.carriers(), &BTreeMap::from([(BaseObject::Star, 1)]));
    }

    #[test]
    fn broken_fork_equation_is_detected() {
        let mut p = elements_of_representable(BaseObject::Move(MoveKind::Para { arity: 1 })).presheaf;
        assert!(check_presheaf(&p));
        let paral = MoveKind::ParaL { arity: 1 };
        let t = Generator::InitialLeg(paral);
        let s = Generator::FinalLeg(paral);
        let (ti, si) = (p.act(t, 0).unwrap(), p.act(s, 0).unwrap());
        p.set_action(t, vec![si]);
        p.set_action(s, vec![ti]);
        assert!(!check_presheaf(&p));
        assert!(check_presheaf(&FinPresheaf::new()));
    }

    #[test]
    fn pushout_of_individual_with_itself() {
        let f = interface_inclusion(2);
        let po = pushout(&f, &f).unwrap();
        assert_eq!(po.apex.size(BaseObject::Star), 2);
        assert_eq!(po.apex.size(BaseObject::Player(2)), 2);
        assert!(check_presheaf(&po.apex));
        assert!(is_mono(&po.left) && is_mono(&po.right));
        assert_eq!(f.then(&po.left).components, f.then(&po.right).components);
    }

    #[test]
    fn pushout_along_identity() {
        let f = interface_inclusion(3);
        let id = PresheafMorphism::identity(&f.source);
        let po = pushout(&f, &id).unwrap();
        assert!(is_isomorphic(&po.apex, &f.target));
        assert!(is_mono(&po.left));
    }

    #[test]
    fn pushout_over_empty_is_coproduct() {
        let x = individual(2);
        let y = elements_of_representable(BaseObject::Move(MoveKind::Tick { arity: 1 })).presheaf;
        let po = pushout(&PresheafMorphism::from_empty(&x), &PresheafMorphism::from_empty(&y)).unwrap();
        for o in x.support().chain(y.support()) {
            assert_eq!(po.apex.size(o), x.size(o) + y.size(o));
        }
        assert!(is_isomorphic(&po.apex, &x.disjoint_union(&y)));
    }

    #[test]
    fn mediating_map() {
        let f = interface_inclusion(2);
        let po = pushout(&f, &f).unwrap();
        let fold = po.mediate(&PresheafMorphism::identity(&f.target), &PresheafMorphism::identity(&f.target)).unwrap();
        assert_eq!(po.left.then(&fold).components, PresheafMorphism::identity(&f.target).components);
        assert!(!is_mono(&fold));
    }

    #[test]
    fn collapse_is_not_mono() {
        let phi = PresheafMorphism::new(channels(2), channels(1), BTreeMap::from([(BaseObject::Star, vec![0, 0])])).unwrap();
        assert!(!is_mono(&phi));
        assert!(is_mono(&PresheafMorphism::identity(&channels(2))));
    }

    #[test]
    fn non_natural_map_is_rejected() {
        let x = individual(2);
        let swap_players_only = BTreeMap::from([(BaseObject::Star, vec![1, 0]), (BaseObject::Player(2), vec![0])]);
        assert!(PresheafMorphism::new(x.clone(), x, swap_players_only).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = elements_of_representable(BaseObject::Move(MoveKind::Tau {
            out_arity: 2,
            out_channel: 1,
            in_arity: 1,
            in_channel: 1,
        }))
        .presheaf;
        let v = p.to_json();
        assert!(v.get("tau:2:1:1:1").is_some());
        assert_eq!(FinPresheaf::from_json(&v).unwrap(), p);
    }
}
