import java.util.Map;
import java.util.HashMap;

public class Inventory {
    private Map stock;
    private int capacity;

    public Inventory(int capacity) {
        this.capacity = capacity;
        this.stock = new HashMap();
    }

    public void add(String item, int qty) {
        if (qty <= 0) {
            throw new IllegalArgumentException("qty must be positive");
        }
        Integer current = (Integer) stock.get(item);
        int next = current == null ? qty : current + qty;
        stock.put(item, next);
    }

    public boolean remove(String item, int qty) {
        Integer current = (Integer) stock.get(item);
        if (current == null || current < qty) {
            return false;
        }
        stock.put(item, current - qty);
        return true;
    }

    public int count(String item) {
        Integer c = (Integer) stock.get(item);
        return c == null ? 0 : c.intValue();
    }

    public boolean isFull() {
        return stock.size() >= capacity;
    }

    public void clear() {
        stock.clear();
    }

    public int getCapacity() {
        return capacity;
    }

    public void setCapacity(int capacity) {
        if (capacity < stock.size()) {
            throw new IllegalStateException("too small");
        }
        this.capacity = capacity;
    }

    @Override
    public String toString() {
        return "Inventory(" + stock.size() + "/" + capacity + ")";
    }

    public synchronized void restock(String item) throws IllegalStateException {
        add(item, capacity - count(item));
    }
}
